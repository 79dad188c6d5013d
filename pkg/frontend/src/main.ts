// Application wiring: image picker, annotation editor, reconstruction
// launcher, and the 3D inspection panes.

import { ApiError, Client, JobStatus, pollJob } from './api.js';
import { Annotator, Tool } from './annotator.js';
import { parseObj } from './mesh.js';
import { importDoc, exportDoc } from './state.js';
import { MeshViewer, linkCameras } from './viewer3d.js';

const client = new Client('');

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

let annotator: Annotator | null = null;
let currentImage: string | null = null;
const viewers: MeshViewer[] = [];
const jobForPane: (string | null)[] = [null, null];

function setStatus(text: string, isError = false): void {
  const bar = el<HTMLDivElement>('status');
  bar.textContent = text;
  bar.className = isError ? 'status error' : 'status';
}

async function refreshImages(): Promise<void> {
  const list = el<HTMLSelectElement>('image-list');
  const images = await client.listImages();
  list.innerHTML = '';
  for (const img of images) {
    const opt = document.createElement('option');
    opt.value = img.id;
    opt.textContent = `${img.id} (${img.width}x${img.height})${img.has_annotations ? ' *' : ''}`;
    list.appendChild(opt);
  }
  if (images.length && !currentImage) {
    await openImage(images[0].id);
  }
}

async function openImage(id: string): Promise<void> {
  currentImage = id;
  const img = new Image();
  img.src = client.imageUrl(id);
  await img.decode();
  const canvas = el<HTMLCanvasElement>('editor');
  annotator = new Annotator(canvas, img.naturalWidth, img.naturalHeight);
  annotator.setImage(img);
  annotator.onChange = () => setStatus('unsaved changes');
  const existing = await client.getAnnotations(id);
  if (existing) {
    annotator.loadState(importDoc(existing));
    annotator.render();
    setStatus(`loaded annotations for ${id}`);
  } else {
    setStatus(`no annotations yet for ${id}`);
  }
}

async function saveAnnotations(): Promise<void> {
  if (!annotator || !currentImage) return;
  const { doc, issues } = exportDoc(annotator.state);
  if (!doc) {
    setStatus(`export blocked: ${issues[0].field}: ${issues[0].message}`, true);
    return;
  }
  try {
    await client.putAnnotations(currentImage, doc);
    setStatus(`saved annotations for ${currentImage}`);
  } catch (e) {
    if (e instanceof ApiError) {
      setStatus(`rejected (${e.status}): ${e.field ?? ''} ${e.message}`, true);
    } else throw e;
  }
}

async function launch(pane: number): Promise<void> {
  if (!currentImage) return;
  const variant = el<HTMLSelectElement>(`variant-${pane}`).value;
  try {
    const jobId = await client.reconstruct(currentImage, variant);
    jobForPane[pane] = jobId;
    setStatus(`job ${jobId} queued (${variant})`);
    const final = await pollJob(client, jobId, (s: JobStatus) => {
      el<HTMLSpanElement>(`job-${pane}`).textContent =
        `${variant}: ${s.status} ${(s.progress * 100).toFixed(0)}%` +
        (s.metrics ? ` n_mse=${s.metrics.n_mse.toFixed(3)} z_mae=${s.metrics.z_mae.toFixed(2)}` : '');
    });
    if (final.status === 'error') {
      setStatus(`job failed: ${final.error}`, true);
      return;
    }
    await showMesh(pane, jobId);
  } catch (e) {
    if (e instanceof ApiError) setStatus(`reconstruct failed (${e.status}): ${e.message}`, true);
    else throw e;
  }
}

async function showMesh(pane: number, jobId: string, retries = 2): Promise<void> {
  try {
    const text = await client.fetchMesh(jobId);
    viewers[pane].setMesh(parseObj(text));
    setStatus(`job ${jobId} mesh loaded`);
  } catch (e) {
    if (retries > 0) {
      setStatus('mesh fetch failed, retrying...', true);
      await new Promise((r) => setTimeout(r, 1000));
      await showMesh(pane, jobId, retries - 1);
    } else {
      setStatus(`mesh fetch failed for ${jobId}`, true);
    }
  }
}

function bindUi(): void {
  for (const tool of [
    'silhouette_smooth',
    'silhouette_sharp',
    'self_occlusion',
    'fold',
    'mask',
  ] as Tool[]) {
    el<HTMLButtonElement>(`tool-${tool}`).addEventListener('click', () => {
      if (annotator) annotator.tool = tool;
      document.querySelectorAll('.tool').forEach((b) => b.classList.remove('active'));
      el(`tool-${tool}`).classList.add('active');
    });
  }
  el<HTMLSelectElement>('convexity').addEventListener('change', (e) => {
    const v = (e.target as HTMLSelectElement).value;
    if (annotator && (v === 'convex' || v === 'concave')) annotator.setConvexity(v);
  });
  el<HTMLSelectElement>('figure-side').addEventListener('change', (e) => {
    const v = (e.target as HTMLSelectElement).value;
    if (annotator && (v === 'left' || v === 'right')) annotator.setFigureSide(v);
  });
  el<HTMLButtonElement>('finish').addEventListener('click', () => annotator?.finishContour());
  el<HTMLButtonElement>('undo').addEventListener('click', () => annotator?.undo());
  el<HTMLButtonElement>('delete').addEventListener('click', () => annotator?.deleteSelected());
  el<HTMLButtonElement>('save').addEventListener('click', () => void saveAnnotations());
  el<HTMLSelectElement>('image-list').addEventListener('change', (e) =>
    void openImage((e.target as HTMLSelectElement).value),
  );
  el<HTMLButtonElement>('launch-0').addEventListener('click', () => void launch(0));
  el<HTMLButtonElement>('launch-1').addEventListener('click', () => void launch(1));
  el<HTMLButtonElement>('view-frontal').addEventListener('click', () =>
    viewers.forEach((v) => v.frontal()),
  );
  el<HTMLButtonElement>('view-rotated').addEventListener('click', () =>
    viewers.forEach((v) => v.rotated()),
  );

  viewers.push(new MeshViewer(el<HTMLCanvasElement>('mesh-0')));
  viewers.push(new MeshViewer(el<HTMLCanvasElement>('mesh-1')));
  linkCameras(viewers[0], viewers[1]);
}

window.addEventListener('DOMContentLoaded', () => {
  bindUi();
  refreshImages().catch((e) => setStatus(`cannot reach service: ${e}`, true));
});
