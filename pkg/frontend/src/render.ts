// DOM renderer: layout panel (SVG) on the left, original text on the right,
// frequent-entity sidebar docked after it. Re-renders the full scene on
// every change; documents are desk-scale so this stays comfortably fast.

import type { SceneModel } from "./scene.js";
import type { EntityRankJson, SentenceJson } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface RendererHooks {
  onNodeHover: (nodeId: string | null) => void;
  onTextHover: (sentenceId: string, offset: number) => void;
  onTextLeave: () => void;
}

export class Renderer {
  private svg: SVGSVGElement;

  constructor(
    private scene: SceneModel,
    private graphHost: HTMLElement,
    private textHost: HTMLElement,
    private hooks: RendererHooks,
  ) {
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("width", "100%");
    this.svg.setAttribute("height", "100%");
    this.graphHost.appendChild(this.svg);
    scene.onChange(() => this.render());
    this.render();
  }

  render(): void {
    this.renderGraph();
    this.renderText();
  }

  private renderGraph(): void {
    const scene = this.scene;
    this.svg.replaceChildren();
    const marker = document.createElementNS(SVG_NS, "defs");
    marker.innerHTML =
      '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" ' +
      'markerHeight="7" orient="auto-start-reverse">' +
      '<path d="M 0 0 L 10 5 L 0 10 z" fill="#64748b"/></marker>';
    this.svg.appendChild(marker);

    let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
    const include = (x0: number, y0: number, x1: number, y1: number) => {
      minX = Math.min(minX, x0); minY = Math.min(minY, y0);
      maxX = Math.max(maxX, x1); maxY = Math.max(maxY, y1);
    };

    // containers first so members draw on top of them
    for (const [id, node] of scene.nodes) {
      if (!node.visible || !node.container) continue;
      const bounds = scene.containerBounds(id) ?? node.bounds;
      if (!bounds) continue;
      include(...bounds);
      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("x", String(bounds[0]));
      rect.setAttribute("y", String(bounds[1]));
      rect.setAttribute("width", String(bounds[2] - bounds[0]));
      rect.setAttribute("height", String(bounds[3] - bounds[1]));
      rect.setAttribute("rx", "8");
      rect.setAttribute("class", "container");
      rect.setAttribute("opacity", String(scene.effectiveOpacity(id)));
      rect.addEventListener("mouseenter", () => this.hooks.onNodeHover(id));
      rect.addEventListener("mouseleave", () => this.hooks.onNodeHover(null));
      this.svg.appendChild(rect);
    }

    for (const edge of scene.doc.edges) {
      const state = scene.edges.get(edge.id);
      if (!state?.visible) continue;
      const a = this.centerOf(edge.source);
      const b = this.centerOf(edge.target);
      if (!a || !b) continue;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(a[0]));
      line.setAttribute("y1", String(a[1]));
      line.setAttribute("x2", String(b[0]));
      line.setAttribute("y2", String(b[1]));
      line.setAttribute("class", "edge");
      line.setAttribute("marker-end", "url(#arrow)");
      line.setAttribute("opacity", String(scene.effectiveOpacity(edge.id)));
      this.svg.appendChild(line);
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String((a[0] + b[0]) / 2));
      label.setAttribute("y", String((a[1] + b[1]) / 2 - 4));
      label.setAttribute("class", "edge-label");
      label.setAttribute("opacity", String(scene.effectiveOpacity(edge.id)));
      label.textContent = edge.label;
      this.svg.appendChild(label);
    }

    for (const [id, node] of scene.nodes) {
      if (!node.visible || node.container) continue;
      include(node.x - node.w / 2, node.y - node.h / 2,
              node.x + node.w / 2, node.y + node.h / 2);
      const group = document.createElementNS(SVG_NS, "g");
      group.setAttribute("opacity", String(scene.effectiveOpacity(id)));
      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("x", String(node.x - node.w / 2));
      rect.setAttribute("y", String(node.y - node.h / 2));
      rect.setAttribute("width", String(node.w));
      rect.setAttribute("height", String(node.h));
      rect.setAttribute("rx", "6");
      rect.setAttribute("class", node.splitting ? "node splitting" : "node");
      group.appendChild(rect);
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(node.x));
      label.setAttribute("y", String(node.y + 4));
      label.setAttribute("class", "node-label");
      label.textContent = this.scene.doc.nodes.find((n) => n.id === id)?.label ?? id;
      group.appendChild(label);
      group.addEventListener("mouseenter", () => this.hooks.onNodeHover(id));
      group.addEventListener("mouseleave", () => this.hooks.onNodeHover(null));
      this.svg.appendChild(group);
    }

    if (minX < maxX) {
      const view = scene.viewport;
      const pad = 60;
      if (view) {
        const w = Math.max(maxX - minX + 2 * pad, 400);
        const h = Math.max(maxY - minY + 2 * pad, 300);
        this.svg.setAttribute(
          "viewBox", `${view.cx - w / 2} ${view.cy - h / 2} ${w} ${h}`);
      } else {
        this.svg.setAttribute(
          "viewBox",
          `${minX - pad} ${minY - pad} ${maxX - minX + 2 * pad} ${maxY - minY + 2 * pad}`,
        );
      }
    }
  }

  private centerOf(id: string): [number, number] | null {
    const node = this.scene.nodes.get(id);
    if (!node || !node.visible) return null;
    if (node.container) {
      const bounds = this.scene.containerBounds(id) ?? node.bounds;
      if (!bounds) return null;
      return [(bounds[0] + bounds[2]) / 2, (bounds[1] + bounds[3]) / 2];
    }
    return [node.x, node.y];
  }

  private renderText(): void {
    const scene = this.scene;
    this.textHost.replaceChildren();
    const revealed = new Set(scene.revealedSentences);
    const sentences = [...scene.doc.sentences].sort((a, b) => a.order - b.order);
    const highlightSpans = scene.highlight?.spans ?? [];
    for (const sentence of sentences) {
      if (!revealed.has(sentence.id)) continue;
      this.textHost.appendChild(this.sentenceElement(sentence, highlightSpans));
    }
  }

  private sentenceElement(sentence: SentenceJson, spans: { sentence_id: string; start: number; end: number }[]): HTMLElement {
    const text = this.scene.doc.text.slice(sentence.start, sentence.end);
    const p = document.createElement("p");
    p.dataset.sentence = sentence.id;
    const marks = spans
      .filter((s) => s.sentence_id === sentence.id)
      .sort((a, b) => a.start - b.start || b.end - a.end);
    let cursor = 0;
    for (const mark of marks) {
      if (mark.start < cursor) continue; // nested span already covered
      p.appendChild(document.createTextNode(text.slice(cursor, mark.start)));
      const em = document.createElement("mark");
      em.textContent = text.slice(mark.start, mark.end);
      p.appendChild(em);
      cursor = mark.end;
    }
    p.appendChild(document.createTextNode(text.slice(cursor)));
    p.addEventListener("mousemove", (event) => {
      const offset = textOffsetAt(p, event);
      if (offset !== null) this.hooks.onTextHover(sentence.id, offset);
    });
    p.addEventListener("mouseleave", () => this.hooks.onTextLeave());
    return p;
  }
}

function textOffsetAt(p: HTMLElement, event: MouseEvent): number | null {
  const caret = (document as any).caretRangeFromPoint?.(event.clientX, event.clientY);
  if (!caret) return null;
  const range = document.createRange();
  range.selectNodeContents(p);
  range.setEnd(caret.startContainer, caret.startOffset);
  return range.toString().length;
}

export function renderSidebar(
  host: HTMLElement,
  ranks: EntityRankJson[],
  scene: SceneModel,
  onSelect: (nodeId: string) => void,
): void {
  const rebuild = () => {
    host.replaceChildren();
    const title = document.createElement("h2");
    title.textContent = "Frequent entities";
    host.appendChild(title);
    for (const rank of ranks) {
      const button = document.createElement("button");
      button.textContent = `${rank.label} (${rank.score})`;
      button.disabled = !scene.nodes.get(rank.node_id)?.visible;
      button.addEventListener("click", () => onSelect(rank.node_id));
      host.appendChild(button);
    }
  };
  scene.onChange(rebuild);
  rebuild();
}
