/** Wire types of the exploration service. */

export interface GraphNodeDoc {
  id: string;
  voltage_kv: number;
  degree: number;
  cluster_size: number;
  expandable_fields: string[];
}

export interface GraphEdgeDoc {
  a: string;
  b: string;
  is_meta: boolean;
}

export interface GraphDocument {
  nodes: GraphNodeDoc[];
  edges: GraphEdgeDoc[];
}

export interface ExpandDelta {
  added_nodes: string[];
  added_edges: [string, string][];
  removed_edges: [string, string][];
  anchor: string | null;
}

export interface StageStats {
  stage: string;
  nodes: number;
  edges: number;
  density: number | null;
  degree_mean: number;
  degree_std: number;
  degree_max: number;
}

export interface StatsDocument {
  stages: StageStats[];
  wasserstein_to_original: number;
}
