import type {
  DistortionReport,
  GalleryEntry,
  GenerateOptions,
  LayerInfo,
  Project,
  ReplicaInfo,
  SemanticsInfo,
} from './types.js';

export interface CreateProjectBody {
  data: string;
  format: 'csv' | 'json';
  title: string | null;
  spec: {
    chart_type: string;
    x_column?: string;
    y_column?: string;
    size_column?: string | null;
    canvas_size?: [number, number];
    aspect_ratio?: [number, number];
  };
}

export interface ReplicateBody {
  entry_id: string;
  slice_count?: number;
  strength?: number;
  seed?: number;
}

export interface RefineBody {
  strength: number;
  seed: number;
  object?: string;
  description?: string;
}

export interface EvaluateBody {
  target: string;
  kind?: 'background';
}

// Everything the panels need from the server. HttpApi is the production
// implementation; tests drive the same surface with an in-memory fake.
export interface Api {
  createProject(body: CreateProjectBody): Promise<Project>;
  getProject(id: string): Promise<Project>;
  getSemantics(id: string): Promise<SemanticsInfo>;
  generate(id: string, options: GenerateOptions): Promise<GalleryEntry>;
  replicate(id: string, body: ReplicateBody): Promise<{ assets: ReplicaInfo[] }>;
  refine(id: string, body: RefineBody): Promise<{ asset: string }>;
  evaluate(id: string, body: EvaluateBody): Promise<DistortionReport>;
  putLayers(id: string, layers: LayerInfo[]): Promise<Project>;
  patchGallery(id: string, entryId: string, kept: boolean): Promise<GalleryEntry>;
  assetUrl(assetId: string): string;
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      detail = `${body.error ?? 'error'}: ${body.detail ?? detail}`;
    } catch {
      /* non-JSON error body */
    }
    throw new Error(detail);
  }
  return (await response.json()) as T;
}

export class HttpApi implements Api {
  constructor(private readonly base: string = '') {}

  private async post<T>(path: string, body: unknown, method = 'POST'): Promise<T> {
    const response = await fetch(this.base + path, {
      method,
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
    return asJson<T>(response);
  }

  createProject(body: CreateProjectBody): Promise<Project> {
    return this.post('/projects', body);
  }

  async getProject(id: string): Promise<Project> {
    return asJson(await fetch(`${this.base}/projects/${id}`));
  }

  async getSemantics(id: string): Promise<SemanticsInfo> {
    return asJson(await fetch(`${this.base}/projects/${id}/semantics`));
  }

  generate(id: string, options: GenerateOptions): Promise<GalleryEntry> {
    return this.post(`/projects/${id}/generate`, options);
  }

  replicate(id: string, body: ReplicateBody): Promise<{ assets: ReplicaInfo[] }> {
    return this.post(`/projects/${id}/replicate`, body);
  }

  refine(id: string, body: RefineBody): Promise<{ asset: string }> {
    return this.post(`/projects/${id}/refine`, body);
  }

  evaluate(id: string, body: EvaluateBody): Promise<DistortionReport> {
    return this.post(`/projects/${id}/evaluate`, body);
  }

  putLayers(id: string, layers: LayerInfo[]): Promise<Project> {
    return this.post(`/projects/${id}/layers`, { layers }, 'PUT');
  }

  patchGallery(id: string, entryId: string, kept: boolean): Promise<GalleryEntry> {
    return this.post(`/projects/${id}/gallery/${entryId}`, { kept }, 'PATCH');
  }

  assetUrl(assetId: string): string {
    return `${this.base}/assets/${assetId}`;
  }
}
