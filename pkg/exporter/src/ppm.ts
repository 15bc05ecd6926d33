/** Binary PPM (P6, maxval 255) reader for pre-extracted video frames. */

export interface Frame {
  width: number;
  height: number;
  /** interleaved RGB, length width*height*3 */
  data: Uint8Array;
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d || byte === 0x0c;
}

export function readPpm(buf: Uint8Array): Frame {
  let pos = 0;
  const tokens: string[] = [];
  while (tokens.length < 4) {
    while (pos < buf.length && (isSpace(buf[pos]) || buf[pos] === 0x23)) {
      if (buf[pos] === 0x23) {
        // comment runs to end of line
        while (pos < buf.length && buf[pos] !== 0x0a) pos++;
      } else {
        pos++;
      }
    }
    const start = pos;
    while (pos < buf.length && !isSpace(buf[pos])) pos++;
    if (pos === start) throw new Error("truncated PPM header");
    tokens.push(Buffer.from(buf.slice(start, pos)).toString("ascii"));
  }
  if (tokens[0] !== "P6") throw new Error(`not a binary PPM (P6) file: ${tokens[0]}`);
  const width = parseInt(tokens[1], 10);
  const height = parseInt(tokens[2], 10);
  const maxval = parseInt(tokens[3], 10);
  if (maxval !== 255) throw new Error(`only maxval 255 supported, got ${maxval}`);
  pos += 1; // single whitespace byte after maxval
  const need = width * height * 3;
  if (buf.length - pos < need) throw new Error("truncated PPM pixel data");
  return { width, height, data: buf.slice(pos, pos + need) };
}
