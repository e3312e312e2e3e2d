// In-memory stand-in honoring the documented server contract: projects are
// stored by id, PUT /layers replaces the stack and returns the persisted
// project, GET returns a deep copy (fresh load semantics).

import type {
  Api,
  CreateProjectBody,
  EvaluateBody,
  RefineBody,
  ReplicateBody,
} from '../src/api.js';
import type {
  DistortionReport,
  GalleryEntry,
  GenerateOptions,
  LayerInfo,
  Project,
  ReplicaInfo,
  SemanticsInfo,
} from '../src/types.js';

const clone = <T>(value: T): T => JSON.parse(JSON.stringify(value)) as T;

let counter = 0;
const nextId = (prefix: string) => `${prefix}${++counter}`;

export function sampleProject(layerCount = 3): Project {
  const layers: LayerInfo[] = [];
  for (let i = 0; i < layerCount; i++) {
    layers.push({
      id: nextId('layer'),
      asset: `proj.${nextId('asset')}`,
      kind: i === 1 ? 'annotation' : 'element',
      transform: { tx: 0, ty: 0, rotate: 0, scale: 1 },
      visible: true,
    });
  }
  return {
    id: nextId('proj'),
    created: '2024-01-01T00:00:00+00:00',
    modified: '2024-01-01T00:00:00+00:00',
    table: {
      columns: [
        { name: 'year', kind: 'numeric' },
        { name: 'area', kind: 'numeric' },
      ],
      rows: [
        [2000, 3.1],
        [2001, 3.4],
      ],
      title: 'Desert area',
    },
    spec: {
      chart_type: 'bar',
      x_column: 'year',
      y_column: 'area',
      size_column: null,
      canvas_size: [512, 512],
      aspect_ratio: [1, 1],
    },
    preview_asset: 'proj.preview',
    annotations_asset: 'proj.annotations',
    gallery: [],
    layers,
  };
}

export function sampleEntry(overrides: Partial<GenerateOptions> = {}): GalleryEntry {
  const options: GenerateOptions = {
    prompt_object: 'pile of books',
    prompt_description: 'cozy watercolor',
    target: 'foreground',
    method: 'conditional',
    mask_variant: 'solid_marks',
    seed: 42,
    strength: 0.8,
    ...overrides,
  };
  return {
    id: nextId('entry'),
    target: options.target,
    method: options.method,
    options,
    request: {},
    result_asset: `proj.${nextId('asset')}`,
    condition_asset: null,
    kept: true,
  };
}

export class FakeApi implements Api {
  private readonly projects = new Map<string, Project>();

  seed(project: Project): void {
    this.projects.set(project.id, clone(project));
  }

  private stored(id: string): Project {
    const project = this.projects.get(id);
    if (!project) throw new Error(`ProjectNotFound: ${id}`);
    return project;
  }

  async createProject(_body: CreateProjectBody): Promise<Project> {
    const project = sampleProject();
    this.seed(project);
    return clone(project);
  }

  async getProject(id: string): Promise<Project> {
    return clone(this.stored(id));
  }

  async getSemantics(_id: string): Promise<SemanticsInfo> {
    return { keywords: [], related: {} };
  }

  async generate(id: string, options: GenerateOptions): Promise<GalleryEntry> {
    const entry = sampleEntry(options);
    this.stored(id).gallery.push(clone(entry));
    return clone(entry);
  }

  async replicate(_id: string, _body: ReplicateBody): Promise<{ assets: ReplicaInfo[] }> {
    return { assets: [] };
  }

  async refine(_id: string, _body: RefineBody): Promise<{ asset: string }> {
    return { asset: 'proj.refined' };
  }

  async evaluate(_id: string, _body: EvaluateBody): Promise<DistortionReport> {
    return {
      global_score: 1.0,
      metric_kind: 'height',
      windows: [],
      error_boxes: [],
      mark_scores: [],
    };
  }

  async putLayers(id: string, layers: LayerInfo[]): Promise<Project> {
    const project = this.stored(id);
    for (const layer of layers) {
      if (layer.transform.scale === 0) throw new Error('MalformedInput: zero scale');
    }
    project.layers = clone(layers);
    project.modified = new Date().toISOString();
    return clone(project);
  }

  async patchGallery(id: string, entryId: string, kept: boolean): Promise<GalleryEntry> {
    const entry = this.stored(id).gallery.find((e) => e.id === entryId);
    if (!entry) throw new Error(`AssetNotFound: ${entryId}`);
    entry.kept = kept;
    return clone(entry);
  }

  assetUrl(assetId: string): string {
    return `/assets/${assetId}`;
  }
}
