/** Rolling force history: a time-windowed ring buffer feeding the force
 * plot.  Peaks are the raw maxima of received values — no smoothing. */

export interface ForceSample {
  time: number;
  impact: number;
  magnetic: number;
  event?: "rupture" | "through";
}

export class ForceHistory {
  private samples: ForceSample[] = [];

  constructor(readonly windowSeconds = 10) {}

  push(sample: ForceSample): void {
    this.samples.push(sample);
    const cutoff = sample.time - this.windowSeconds;
    let drop = 0;
    while (drop < this.samples.length && this.samples[drop].time < cutoff) {
      drop++;
    }
    if (drop > 0) this.samples.splice(0, drop);
  }

  get length(): number {
    return this.samples.length;
  }

  window(): readonly ForceSample[] {
    return this.samples;
  }

  /** Maximum impact force currently in the window (exact, unsmoothed). */
  peak(): number {
    let p = 0;
    for (const s of this.samples) p = Math.max(p, s.impact);
    return p;
  }

  events(): ForceSample[] {
    return this.samples.filter((s) => s.event !== undefined);
  }
}
