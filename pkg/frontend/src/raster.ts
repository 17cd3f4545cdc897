/**
 * Grayscale sketch raster: white ink on black, thick round brush.
 *
 * The pad owns a plain byte buffer rather than a canvas context, so
 * drawing and export are pure and fully testable off-DOM; the browser
 * layer blits the buffer to a canvas for display.
 */

export const PAD_SIDE = 280;
export const BRUSH_RADIUS = 9; // ~18 px brush

export class SketchPad {
  readonly width: number;
  readonly height: number;
  readonly pixels: Uint8ClampedArray;

  constructor(width: number = PAD_SIDE, height: number = PAD_SIDE) {
    if (width < 1 || height < 1) {
      throw new Error(`bad pad dimensions ${width}x${height}`);
    }
    this.width = width;
    this.height = height;
    this.pixels = new Uint8ClampedArray(width * height);
  }

  clear(): void {
    this.pixels.fill(0);
  }

  isEmpty(): boolean {
    return !this.pixels.some((v) => v > 0);
  }

  /** Stamp a filled disk of ink. */
  stampDot(x: number, y: number, radius: number = BRUSH_RADIUS): void {
    const r2 = radius * radius;
    const x0 = Math.max(0, Math.floor(x - radius));
    const x1 = Math.min(this.width - 1, Math.ceil(x + radius));
    const y0 = Math.max(0, Math.floor(y - radius));
    const y1 = Math.min(this.height - 1, Math.ceil(y + radius));
    for (let py = y0; py <= y1; py++) {
      for (let px = x0; px <= x1; px++) {
        const dx = px - x;
        const dy = py - y;
        if (dx * dx + dy * dy <= r2) {
          this.pixels[py * this.width + px] = 255;
        }
      }
    }
  }

  /** Stamp disks along a segment densely enough to leave no gaps. */
  strokeSegment(
    x0: number,
    y0: number,
    x1: number,
    y1: number,
    radius: number = BRUSH_RADIUS,
  ): void {
    const length = Math.hypot(x1 - x0, y1 - y0);
    const steps = Math.max(1, Math.ceil(length / (radius / 2)));
    for (let k = 0; k <= steps; k++) {
      const t = k / steps;
      this.stampDot(x0 + t * (x1 - x0), y0 + t * (y1 - y0), radius);
    }
  }

  /** Draw a whole polyline, points as [x, y] pairs. */
  strokePolyline(points: ReadonlyArray<readonly [number, number]>): void {
    if (points.length === 1) {
      this.stampDot(points[0][0], points[0][1]);
      return;
    }
    for (let i = 1; i < points.length; i++) {
      this.strokeSegment(
        points[i - 1][0],
        points[i - 1][1],
        points[i][0],
        points[i][1],
      );
    }
  }
}
