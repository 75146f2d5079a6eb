// Typed client for the reader service. Every call maps to one endpoint; the
// reader never computes graph semantics locally.

import type {
  DocumentJson,
  EntityRankJson,
  NeighborhoodJson,
  TimelineJson,
} from "./types.js";

export interface ApiClient {
  document(id: string): Promise<DocumentJson>;
  timeline(id: string): Promise<TimelineJson>;
  entities(id: string): Promise<EntityRankJson[]>;
  neighborhood(id: string, nodeId: string): Promise<NeighborhoodJson>;
  nodeForSpan(id: string, sentenceId: string, offset: number): Promise<string | null>;
}

export class HttpApiClient implements ApiClient {
  constructor(private baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`);
    if (!resp.ok) {
      throw new Error(`GET ${path} failed: ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  document(id: string): Promise<DocumentJson> {
    return this.get(`/documents/${id}`);
  }

  timeline(id: string): Promise<TimelineJson> {
    return this.get(`/documents/${id}/timeline`);
  }

  entities(id: string): Promise<EntityRankJson[]> {
    return this.get(`/documents/${id}/entities`);
  }

  neighborhood(id: string, nodeId: string): Promise<NeighborhoodJson> {
    return this.get(`/documents/${id}/neighborhood/${nodeId}`);
  }

  async nodeForSpan(id: string, sentenceId: string, offset: number): Promise<string | null> {
    const resp = await this.get<{ node: string | null }>(
      `/documents/${id}/span?sentence=${encodeURIComponent(sentenceId)}&offset=${offset}`,
    );
    return resp.node;
  }
}
