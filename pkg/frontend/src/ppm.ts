/** Decoder for the binary P6 previews the service emits for event streams. */

export interface DecodedImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray<ArrayBuffer>;
}

export function decodePpm(bytes: Uint8Array): DecodedImage {
  // header: "P6\n<width> <height>\n255\n" followed by packed RGB
  const newline = 0x0a;
  const cuts: number[] = [];
  for (let i = 0; i < bytes.length && cuts.length < 3; i++) {
    if (bytes[i] === newline) cuts.push(i);
  }
  if (cuts.length < 3) throw new Error("truncated ppm header");
  const text = (from: number, to: number) => String.fromCharCode(...bytes.subarray(from, to));
  if (text(0, cuts[0]!) !== "P6") throw new Error("not a binary P6 ppm");
  const dims = text(cuts[0]! + 1, cuts[1]!).trim().split(/\s+/).map(Number);
  const maxval = Number(text(cuts[1]! + 1, cuts[2]!).trim());
  const [width, height] = dims;
  if (dims.length !== 2 || !width || !height || Number.isNaN(width) || Number.isNaN(height)) {
    throw new Error("malformed ppm dimensions");
  }
  if (maxval !== 255) throw new Error(`unsupported ppm maxval ${maxval}`);
  const body = bytes.subarray(cuts[2]! + 1);
  if (body.length < width * height * 3) throw new Error("truncated ppm body");
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let p = 0; p < width * height; p++) {
    rgba[p * 4] = body[p * 3]!;
    rgba[p * 4 + 1] = body[p * 3 + 1]!;
    rgba[p * 4 + 2] = body[p * 3 + 2]!;
    rgba[p * 4 + 3] = 255;
  }
  return { width, height, rgba };
}
