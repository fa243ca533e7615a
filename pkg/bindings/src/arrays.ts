/** Contiguous complex array views built on Float64Array pairs.
 *
 * Inputs that already are Float64Array instances are wrapped without copying
 * (`copied: false`); anything else is converted once and flagged. Engine
 * readers always hand out fresh contiguous buffers.
 */

export interface ComplexArray {
  readonly re: Float64Array;
  readonly im: Float64Array;
  readonly length: number;
  /** true when construction had to materialize a new buffer */
  readonly copied: boolean;
}

export function asComplex(
  re: Float64Array | ArrayLike<number>,
  im: Float64Array | ArrayLike<number>,
): ComplexArray {
  if (re.length !== im.length) {
    throw new RangeError(`re and im lengths differ: ${re.length} vs ${im.length}`);
  }
  const copied = !(re instanceof Float64Array) || !(im instanceof Float64Array);
  const reArr = re instanceof Float64Array ? re : Float64Array.from(re);
  const imArr = im instanceof Float64Array ? im : Float64Array.from(im);
  return { re: reArr, im: imArr, length: reArr.length, copied };
}

export function complexAt(arr: ComplexArray, index: number): { re: number; im: number } {
  if (index < 0 || index >= arr.length) {
    throw new RangeError(`index ${index} out of range [0, ${arr.length})`);
  }
  return { re: arr.re[index]!, im: arr.im[index]! };
}

export function absAt(arr: ComplexArray, index: number): number {
  const { re, im } = complexAt(arr, index);
  return Math.hypot(re, im);
}

/** Flat index of coefficient (n, m) in the packed layout n^2 + n + m. */
export function shIndex(n: number, m: number): number {
  if (!Number.isInteger(n) || n < 0 || !Number.isInteger(m) || Math.abs(m) > n) {
    throw new RangeError(`invalid spherical-harmonic index (${n}, ${m})`);
  }
  return n * n + n + m;
}
