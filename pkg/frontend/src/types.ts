// Mirrors of the server's wire formats. Field names match the JSON bodies
// exactly; the UI never does image math, it only moves these records around.

export type ChartType = 'bar' | 'line' | 'pie' | 'scatter';
export type Target = 'foreground' | 'background';
export type Method = 'conditional' | 'unconditional';
export type LayerKind = 'annotation' | 'element' | 'background';

export interface ColumnInfo {
  name: string;
  kind: 'numeric' | 'categorical' | 'temporal';
}

export interface TableInfo {
  columns: ColumnInfo[];
  rows: (string | number | null)[][];
  title: string | null;
}

export interface SpecInfo {
  chart_type: ChartType;
  x_column: string;
  y_column: string;
  size_column: string | null;
  canvas_size: [number, number];
  aspect_ratio: [number, number];
}

export interface LayerTransform {
  tx: number;
  ty: number;
  rotate: number;
  scale: number;
}

export interface LayerInfo {
  id: string;
  asset: string;
  kind: LayerKind;
  transform: LayerTransform;
  visible: boolean;
}

export interface GenerateOptions {
  prompt_object: string;
  prompt_description: string;
  target: Target;
  method: Method;
  mask_variant: string | null;
  seed: number;
  strength: number | null;
}

export interface GalleryEntry {
  id: string;
  target: Target;
  method: Method;
  options: GenerateOptions;
  request: Record<string, unknown>;
  result_asset: string;
  condition_asset: string | null;
  kept: boolean;
}

export interface Project {
  id: string;
  created: string;
  modified: string;
  table: TableInfo;
  spec: SpecInfo;
  preview_asset: string;
  annotations_asset: string;
  gallery: GalleryEntry[];
  layers: LayerInfo[];
}

export interface KeywordInfo {
  term: string;
  score: number;
}

export interface RelatedTermInfo {
  term: string;
  similarity: number;
  frequency: number;
  rank: number;
}

export interface SemanticsInfo {
  keywords: KeywordInfo[];
  related: Record<string, RelatedTermInfo[]>;
}

export interface WindowScoreInfo {
  index: number;
  x_range: [number, number];
  score: number;
}

export interface MarkScoreInfo {
  mark: number;
  score: number;
  measured: number;
  expected: number;
}

export interface DistortionReport {
  global_score: number;
  metric_kind: 'height' | 'trend' | 'angle' | 'size';
  windows: WindowScoreInfo[];
  error_boxes: [number, number, number, number][];
  mark_scores: MarkScoreInfo[];
}

export interface ReplicaInfo {
  mark: number;
  asset: string;
  height: number;
}
