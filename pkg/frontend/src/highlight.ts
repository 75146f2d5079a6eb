// Hover-driven bidirectional highlighting: the emphasized set is exactly the
// service's neighborhood response, everything else dims, and the matching
// text spans light up. Hovering changes opacities only, never geometry or
// the revealed prefix.

import type { ApiClient } from "./api.js";
import type { SceneModel } from "./scene.js";
import type { NeighborhoodJson } from "./types.js";

export function applyNeighborhood(scene: SceneModel, hood: NeighborhoodJson): void {
  scene.highlight = {
    nodes: new Set(hood.nodes),
    edges: new Set(hood.edges.map((e) => e.id)),
    spans: Object.values(hood.spans).flat(),
  };
}

export function clearHighlight(scene: SceneModel): void {
  scene.highlight = null;
}

export class HoverController {
  private generation = 0;

  constructor(
    private scene: SceneModel,
    private api: ApiClient,
    private docId: string,
  ) {}

  /** Hover over a revealed node (or a composite container). */
  async hoverNode(nodeId: string | null): Promise<void> {
    const generation = ++this.generation;
    if (nodeId === null) {
      clearHighlight(this.scene);
      return;
    }
    if (!this.scene.nodes.get(nodeId)?.visible) {
      clearHighlight(this.scene); // stale target clears focus
      return;
    }
    const hood = await this.api.neighborhood(this.docId, nodeId);
    if (generation === this.generation) {
      applyNeighborhood(this.scene, hood);
    }
  }

  /** Hover over a character offset in the text panel. */
  async hoverText(sentenceId: string, offset: number): Promise<void> {
    const nodeId = await this.api.nodeForSpan(this.docId, sentenceId, offset);
    await this.hoverNode(nodeId);
  }
}

/** Center the viewport on an entity and highlight its neighborhood.
 * Returns false when the entity is not revealed yet (entry disabled). */
export async function selectEntity(
  scene: SceneModel,
  api: ApiClient,
  docId: string,
  nodeId: string,
): Promise<boolean> {
  const node = scene.nodes.get(nodeId);
  if (!node || !node.visible) return false;
  const bounds = node.container ? scene.containerBounds(nodeId) : null;
  scene.viewport = bounds
    ? { cx: (bounds[0] + bounds[2]) / 2, cy: (bounds[1] + bounds[3]) / 2 }
    : { cx: node.x, cy: node.y };
  applyNeighborhood(scene, await api.neighborhood(docId, nodeId));
  return true;
}
