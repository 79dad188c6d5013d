// Thin REST client over the reconstruction service.

import { AnnotationDoc } from './schema.js';

export interface ImageInfo {
  id: string;
  width: number;
  height: number;
  has_annotations: boolean;
}

export interface JobStatus {
  job_id: string;
  image_id: string;
  variant: string;
  status: 'queued' | 'running' | 'done' | 'error';
  progress: number;
  metrics?: { n_mse: number; z_mae: number; pixels: number } | null;
  error?: string;
}

export class ApiError extends Error {
  status: number;
  field?: string;

  constructor(status: number, detail: string, field?: string) {
    super(detail);
    this.status = status;
    this.field = field;
  }
}

async function check(res: Response): Promise<Response> {
  if (res.ok) return res;
  let detail = res.statusText;
  let field: string | undefined;
  try {
    const body = await res.json();
    detail = body.detail ?? detail;
    field = body.field;
  } catch {
    // non-JSON error body
  }
  throw new ApiError(res.status, detail, field);
}

export class Client {
  constructor(private base = '') {}

  async listImages(): Promise<ImageInfo[]> {
    const res = await check(await fetch(`${this.base}/api/images`));
    return res.json();
  }

  imageUrl(id: string): string {
    return `${this.base}/api/images/${id}`;
  }

  async getAnnotations(id: string): Promise<AnnotationDoc | null> {
    const res = await fetch(`${this.base}/api/annotations/${id}`);
    if (res.status === 404) return null;
    return (await check(res)).json();
  }

  async putAnnotations(id: string, doc: AnnotationDoc): Promise<void> {
    await check(
      await fetch(`${this.base}/api/annotations/${id}`, {
        method: 'PUT',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(doc),
      }),
    );
  }

  async reconstruct(id: string, variant: string, config?: unknown): Promise<string> {
    const res = await check(
      await fetch(`${this.base}/api/reconstruct`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ id, variant, config }),
      }),
    );
    return (await res.json()).job_id;
  }

  async jobStatus(jobId: string): Promise<JobStatus> {
    const res = await check(await fetch(`${this.base}/api/jobs/${jobId}`));
    return res.json();
  }

  async fetchMesh(jobId: string): Promise<string> {
    const res = await check(await fetch(`${this.base}/api/jobs/${jobId}/mesh`));
    return res.text();
  }
}

// Poll a job at a fixed cadence until it settles.
export async function pollJob(
  client: Client,
  jobId: string,
  onUpdate: (s: JobStatus) => void,
  intervalMs = 1000,
  sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
): Promise<JobStatus> {
  for (;;) {
    const status = await client.jobStatus(jobId);
    onUpdate(status);
    if (status.status === 'done' || status.status === 'error') return status;
    await sleep(intervalMs);
  }
}
