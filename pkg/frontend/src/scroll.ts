// Scroll-direction calibration.
//
// Platforms disagree on wheel polarity (natural vs reverse scrolling), so
// the user is asked to scroll AWAY from themselves; the majority sign of
// the raw deltas fixes the session's polarity so that "scroll away" always
// produces positive wheel payloads.

export const WHEEL_DELTA_PER_DETENT = 100; // typical browser deltaY step
const MIN_CALIBRATION_DETENTS = 5;

export function rawDetents(deltaY: number): number {
  return deltaY / WHEEL_DELTA_PER_DETENT;
}

export class ScrollCalibration {
  private signs: number[] = [];
  sign: number | null = null;

  /** Restart calibration (repeat calibration overwrites the old sign). */
  begin(): void {
    this.signs = [];
    this.sign = null;
  }

  /**
   * Feed one wheel event observed while the user scrolls away.
   * Returns the decided sign once at least five detents with a clear
   * majority arrived, else null (keep scrolling / retry on zero input).
   */
  feed(deltaY: number): number | null {
    if (deltaY !== 0) {
      this.signs.push(Math.sign(deltaY));
    }
    if (this.signs.length >= MIN_CALIBRATION_DETENTS) {
      const total = this.signs.reduce((a, b) => a + b, 0);
      if (total !== 0) {
        this.sign = Math.sign(total);
        return this.sign;
      }
    }
    return null;
  }

  /** Calibrated detents: "scroll away" comes out positive. */
  detents(deltaY: number): number {
    if (this.sign === null) {
      throw new Error("scroll direction is not calibrated yet");
    }
    return rawDetents(deltaY) * this.sign;
  }
}
