export class SegmenterUnavailableError extends Error {}

export class PromptOutOfBoundsError extends Error {}

export class EmptyMaskError extends Error {}

export class LengthMismatchError extends Error {}
