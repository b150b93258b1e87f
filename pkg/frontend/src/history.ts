/** What-if bookkeeping: a sequence gate so stale responses are dropped,
 * and the ordered comparison list of past submissions. */

export class SequenceGate {
  private next = 1;
  private applied = 0;

  /** Returns the sequence number for a submission about to be sent. */
  begin(): number {
    return this.next++;
  }

  /** True if this response is the newest seen; later once a higher
   * sequence number has been accepted, older responses are stale. */
  accept(seq: number): boolean {
    if (seq <= this.applied) {
      return false;
    }
    this.applied = seq;
    return true;
  }
}

export interface HistoryRow {
  seq: number;
  inputs: string[]; // display values, one per form field (or the file name)
  label: string;
  probability: number;
}

export class WhatIfHistory {
  private rows: HistoryRow[] = [];

  append(row: HistoryRow): void {
    this.rows.push(row);
  }

  list(): readonly HistoryRow[] {
    return this.rows;
  }

  clear(): void {
    this.rows = [];
  }
}
