// The scene model is the single source of truth for what the reader shows:
// element visibility, geometry, opacities, revealed sentences, and the
// current highlight. It is pure state; renderers subscribe to changes.

import type { DocumentJson, EventJson, TextSpanJson } from "./types.js";

export interface NodeState {
  visible: boolean;
  opacity: number;
  container: boolean;
  // atomic geometry (center + extent)
  x: number;
  y: number;
  w: number;
  h: number;
  // container geometry when morphed or revealed as a composite
  bounds: [number, number, number, number] | null;
  splitting: boolean;
}

export interface EdgeState {
  visible: boolean;
  opacity: number;
}

export interface Highlight {
  nodes: Set<string>;
  edges: Set<string>;
  spans: TextSpanJson[];
}

export class SceneModel {
  readonly doc: DocumentJson;
  readonly nodes = new Map<string, NodeState>();
  readonly edges = new Map<string, EdgeState>();
  readonly revealedSentences: string[] = [];
  highlight: Highlight | null = null;
  viewport: { cx: number; cy: number } | null = null;
  private listeners: Array<() => void> = [];

  constructor(doc: DocumentJson) {
    this.doc = doc;
    for (const node of doc.nodes) {
      this.nodes.set(node.id, {
        visible: false,
        opacity: 1,
        container: false,
        x: 0,
        y: 0,
        w: 0,
        h: 0,
        bounds: null,
        splitting: false,
      });
    }
    for (const edge of doc.edges) {
      this.edges.set(edge.id, { visible: false, opacity: 1 });
    }
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  applyEvent(ev: EventJson): void {
    const g = ev.geometry as Record<string, any>;
    switch (ev.kind) {
      case "sentence_begin":
        this.revealedSentences.push(ev.subjects[0]);
        break;
      case "dim_existing": {
        const opacity = (g.opacity as number) ?? 0.35;
        for (const id of ev.subjects) {
          const node = this.nodes.get(id);
          if (node) node.opacity = opacity;
          const edge = this.edges.get(id);
          if (edge) edge.opacity = opacity;
        }
        break;
      }
      case "node_split":
        this.applySplitPhase(ev, g);
        break;
      case "node_move": {
        const node = this.nodes.get(ev.subjects[0]);
        if (node) {
          node.x = g.after[0];
          node.y = g.after[1];
        }
        break;
      }
      case "reveal_node": {
        const node = this.nodes.get(ev.subjects[0]);
        if (!node) break;
        node.visible = true;
        if (g.at) {
          node.x = g.at[0];
          node.y = g.at[1];
          node.w = g.size[0];
          node.h = g.size[1];
        } else if (g.bounds) {
          node.container = true;
          node.bounds = g.bounds as [number, number, number, number];
        }
        break;
      }
      case "reveal_edge": {
        const edge = this.edges.get(ev.subjects[0]);
        if (edge) edge.visible = true;
        break;
      }
      case "sentence_end": {
        const opacity = (g.opacity as number) ?? 1;
        for (const node of this.nodes.values()) node.opacity = opacity;
        for (const edge of this.edges.values()) edge.opacity = opacity;
        break;
      }
    }
    this.emit();
  }

  private applySplitPhase(ev: EventJson, g: Record<string, any>): void {
    switch (g.phase) {
      case "recolor": {
        const node = this.nodes.get(ev.subjects[0]);
        if (node) node.splitting = true;
        break;
      }
      case "morph": {
        const node = this.nodes.get(ev.subjects[0]);
        if (node) {
          node.container = true;
          node.bounds = g.after as [number, number, number, number];
          node.splitting = false;
        }
        break;
      }
      case "member": {
        const member = this.nodes.get(ev.subjects[1]);
        if (member) {
          member.visible = true;
          member.x = g.at[0];
          member.y = g.at[1];
          member.w = g.size[0];
          member.h = g.size[1];
        }
        break;
      }
      case "edge": {
        const edge = this.edges.get(ev.subjects[1]);
        if (edge) edge.visible = true;
        break;
      }
    }
  }

  /** Center-based geometry of every visible non-container node. */
  atomicGeometry(): Record<string, { x: number; y: number; w: number; h: number }> {
    const out: Record<string, { x: number; y: number; w: number; h: number }> = {};
    for (const [id, node] of this.nodes) {
      if (node.visible && !node.container) {
        out[id] = { x: node.x, y: node.y, w: node.w, h: node.h };
      }
    }
    return out;
  }

  visibleElementIds(): Set<string> {
    const out = new Set<string>();
    for (const [id, node] of this.nodes) if (node.visible) out.add(id);
    for (const [id, edge] of this.edges) if (edge.visible) out.add(id);
    return out;
  }

  /** Derived container rectangle: members' rectangles plus padding. */
  containerBounds(id: string, padding = 16): [number, number, number, number] | null {
    const node = this.nodes.get(id);
    if (!node || !node.container) return null;
    let rect: [number, number, number, number] | null = null;
    for (const m of this.doc.memberships) {
      if (m.parent !== id) continue;
      const child = this.nodes.get(m.child);
      if (!child || !child.visible) continue;
      const r: [number, number, number, number] = child.container
        ? this.containerBounds(m.child, padding) ?? [child.x, child.y, child.x, child.y]
        : [child.x - child.w / 2, child.y - child.h / 2,
           child.x + child.w / 2, child.y + child.h / 2];
      rect = rect === null ? r : [
        Math.min(rect[0], r[0]), Math.min(rect[1], r[1]),
        Math.max(rect[2], r[2]), Math.max(rect[3], r[3]),
      ];
    }
    if (rect === null) return node.bounds;
    return [rect[0] - padding, rect[1] - padding, rect[2] + padding, rect[3] + padding];
  }

  /** Opacity after applying the hover highlight, if any. */
  effectiveOpacity(id: string): number {
    const base = this.nodes.get(id)?.opacity ?? this.edges.get(id)?.opacity ?? 1;
    if (!this.highlight) return base;
    const emphasized = this.highlight.nodes.has(id) || this.highlight.edges.has(id);
    return emphasized ? 1 : Math.min(base, 0.35);
  }
}
