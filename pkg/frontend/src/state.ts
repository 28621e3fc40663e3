/** Pane state: each open analysis is independent; closing or mutating one
 * never touches another. Generation counters discard stale fetches. */

export type PaneMode = "aggregated" | "chronological";

export interface Pane {
  id: number;
  session: string;
  tid: number;
  metric: string;
  mode: PaneMode;
  search: string;
  zoomStack: string[][]; // stack of node paths; last entry is current zoom
  generation: number;
}

export class ViewState {
  panes: Pane[] = [];
  selectedSessions: string[] = [];
  private nextId = 1;

  openPane(session: string, tid: number, metric: string, mode: PaneMode = "aggregated"): Pane {
    const pane: Pane = {
      id: this.nextId++,
      session,
      tid,
      metric,
      mode,
      search: "",
      zoomStack: [],
      generation: 0,
    };
    this.panes.push(pane);
    return pane;
  }

  closePane(id: number): void {
    this.panes = this.panes.filter((p) => p.id !== id);
  }

  pane(id: number): Pane | undefined {
    return this.panes.find((p) => p.id === id);
  }

  /** Bump before issuing a fetch; a response is stale if the pane moved on. */
  bump(pane: Pane): number {
    pane.generation += 1;
    return pane.generation;
  }

  isCurrent(pane: Pane, generation: number): boolean {
    return pane.generation === generation;
  }

  zoomIn(pane: Pane, path: string[]): void {
    pane.zoomStack.push(path);
  }

  /** Pop to a breadcrumb depth; 0 restores the unzoomed view. */
  zoomTo(pane: Pane, depth: number): void {
    pane.zoomStack = pane.zoomStack.slice(0, depth);
  }

  currentZoom(pane: Pane): string[] {
    return pane.zoomStack.length
      ? pane.zoomStack[pane.zoomStack.length - 1]
      : [];
  }
}
