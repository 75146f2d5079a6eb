// Wire types mirroring the service's JSON serializations.

export interface TextSpanJson {
  sentence_id: string;
  start: number;
  end: number;
}

export interface SentenceJson {
  id: string;
  order: number;
  start: number;
  end: number;
}

export interface NodeJson {
  id: string;
  label: string;
  kind: "atomic" | "composite";
  spans: TextSpanJson[];
  first_sentence: number;
}

export interface EdgeJson {
  id: string;
  source: string;
  target: string;
  label: string;
  sentence_id: string;
}

export interface MembershipJson {
  parent: string;
  child: string;
}

export interface DocumentJson {
  id: string;
  text: string;
  sentences: SentenceJson[];
  nodes: NodeJson[];
  edges: EdgeJson[];
  memberships: MembershipJson[];
}

export interface EventJson {
  kind:
    | "sentence_begin"
    | "sentence_end"
    | "dim_existing"
    | "node_split"
    | "node_move"
    | "reveal_node"
    | "reveal_edge";
  subjects: string[];
  geometry: Record<string, unknown>;
  duration_ms: number;
}

export interface BlockJson {
  sentence_order: number;
  events: EventJson[];
}

export interface TimelineJson {
  document_id: string;
  columns: Record<string, number>;
  blocks: BlockJson[];
}

export interface NodeGeometryJson {
  x: number;
  y: number;
  w: number;
  h: number;
  pinned: boolean;
}

export interface StateRecordJson {
  nodes: Record<string, NodeGeometryJson>;
  converged: boolean;
  iterations: number;
}

export interface EntityRankJson {
  node_id: string;
  label: string;
  score: number;
  spans: TextSpanJson[];
}

export interface NeighborhoodJson {
  nodes: string[];
  edges: EdgeJson[];
  spans: Record<string, TextSpanJson[]>;
}

export interface BundleJson {
  id: string;
  document: DocumentJson;
  states: StateRecordJson[];
  timeline: TimelineJson;
  entities: EntityRankJson[];
  config: Record<string, unknown>;
  provenance: Record<string, unknown>;
}
