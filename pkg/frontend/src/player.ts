// Click-driven playback of timeline blocks. Each advance replays one
// sentence block's events in index order, honoring the suggested durations
// scaled by the speed multiplier. Input arriving while a block animates is
// queued FIFO, never dropped; the revealed prefix k grows only at block end.

import type { SceneModel } from "./scene.js";
import type { TimelineJson } from "./types.js";

type Scheduler = (fn: () => void, delayMs: number) => void;

const defaultScheduler: Scheduler = (fn, delayMs) => {
  setTimeout(fn, delayMs);
};

export type PlaybackState = "idle" | "animating";

export class ReaderSession {
  k = 0;
  state: PlaybackState = "idle";
  private queue: Array<() => void> = [];

  constructor(
    private scene: SceneModel,
    private timeline: TimelineJson,
    /** 1 = suggested durations, 0 = apply instantly (tests, skip buttons). */
    public speed = 1,
    private schedule: Scheduler = defaultScheduler,
    private onBlockDone: (k: number) => void = () => {},
  ) {}

  get sentenceCount(): number {
    return this.timeline.blocks.length;
  }

  get atEnd(): boolean {
    return this.k >= this.sentenceCount;
  }

  /** Reveal the next sentence; queued if an animation is in flight. */
  advance(): void {
    this.enqueue(() => this.playNext());
  }

  /** Run any action under the same FIFO discipline as clicks. */
  enqueue(action: () => void): void {
    if (this.state === "animating") {
      this.queue.push(action);
      return;
    }
    action();
  }

  private playNext(): void {
    if (this.atEnd) return; // advancing past the last sentence is a no-op
    const block = this.timeline.blocks[this.k];
    if (this.speed <= 0) {
      for (const ev of block.events) this.scene.applyEvent(ev);
      this.finishBlock();
      return;
    }
    this.state = "animating";
    let at = 0;
    for (const ev of block.events) {
      this.schedule(() => this.scene.applyEvent(ev), at);
      at += ev.duration_ms * this.speed;
    }
    this.schedule(() => this.finishBlock(), at);
  }

  private finishBlock(): void {
    this.k += 1;
    this.state = "idle";
    this.onBlockDone(this.k);
    const next = this.queue.shift();
    if (next) next();
  }
}
