import { HttpApi } from './api.js';
import { CanvasView } from './canvas.js';
import { EvaluationPanel } from './panels/evaluation.js';
import { GenerationPanel } from './panels/generation.js';
import { SettingsPanel } from './panels/settings.js';
import { ProjectState } from './state.js';

function boot(): void {
  // Served from /ui/ by the chartforge server; same-origin API.
  const api = new HttpApi('');
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app root');
  root.innerHTML = `
    <aside id="cf-left"></aside>
    <main id="cf-center"><div id="cf-canvas-holder"></div></main>
    <aside id="cf-right"></aside>`;

  const left = document.getElementById('cf-left')!;
  const right = document.getElementById('cf-right')!;
  const canvasHolder = document.getElementById('cf-canvas-holder')!;

  const settings = new SettingsPanel(api, left);
  const generation = new GenerationPanel(api, left);
  const evaluation = new EvaluationPanel(api, right);
  const canvas = new CanvasView(api, canvasHolder);

  let state: ProjectState | null = null;

  const repaint = async () => {
    if (state) await canvas.render(state.project);
  };

  settings.onProjectCreated = (project) => {
    state = new ProjectState(api, project);
    generation.setProject(state);
    evaluation.setProject(state);
    canvas.clearOverlay();
    void repaint();
  };
  settings.onTermPicked = (term) => generation.setObjectTerm(term);

  generation.onGenerated = () => {
    evaluation.setProject(state!);
    void repaint();
  };
  generation.onModified = () => {
    evaluation.setProject(state!);
    void repaint();
  };

  evaluation.onLayersChanged = () => void repaint();
  evaluation.onOverlay = (svg) => canvas.setOverlay(svg);
  canvas.onSelect = (layerId) => evaluation.selectLayer(layerId);
}

boot();
