"use strict";
/** Pane state: each open analysis is independent; closing or mutating one
 * never touches another. Generation counters discard stale fetches. */
Object.defineProperty(exports, "__esModule", { value: true });
exports.ViewState = void 0;
class ViewState {
    constructor() {
        this.panes = [];
        this.selectedSessions = [];
        this.nextId = 1;
    }
    openPane(session, tid, metric, mode = "aggregated") {
        const pane = {
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
    closePane(id) {
        this.panes = this.panes.filter((p) => p.id !== id);
    }
    pane(id) {
        return this.panes.find((p) => p.id === id);
    }
    /** Bump before issuing a fetch; a response is stale if the pane moved on. */
    bump(pane) {
        pane.generation += 1;
        return pane.generation;
    }
    isCurrent(pane, generation) {
        return pane.generation === generation;
    }
    zoomIn(pane, path) {
        pane.zoomStack.push(path);
    }
    /** Pop to a breadcrumb depth; 0 restores the unzoomed view. */
    zoomTo(pane, depth) {
        pane.zoomStack = pane.zoomStack.slice(0, depth);
    }
    currentZoom(pane) {
        return pane.zoomStack.length
            ? pane.zoomStack[pane.zoomStack.length - 1]
            : [];
    }
}
exports.ViewState = ViewState;
