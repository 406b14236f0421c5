// Typed client for the curation service. The server is the single source
// of truth: it computes kept counts and applies the majority/removal rules;
// this client only moves JSON.

export interface SolidSummary {
  solid_id: number;
  view_count: number;
  kept_count: number;
}

export interface ViewInfo {
  view_id: string;
  split: string;
  votes: Record<string, boolean>;
}

export interface VoteAck {
  view_id: string;
  voter: string;
  keep: boolean;
  warning: string | null;
}

export interface ManifestEntry {
  sample_id: string;
  solid_id: number;
  view_id: number;
  path: string;
}

export interface ExportedSplit {
  split: string;
  seed: number;
  samples: ManifestEntry[];
}

export interface ServiceConfig {
  roster: string[];
  splits: string[];
  allow_partial: boolean;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      detail = body.detail ?? body.error ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(detail, response.status);
  }
  return (await response.json()) as T;
}

export class CurationApi {
  constructor(private readonly base: string = "") {}

  config(): Promise<ServiceConfig> {
    return fetch(`${this.base}/api/config`).then((r) => asJson<ServiceConfig>(r));
  }

  solids(): Promise<SolidSummary[]> {
    return fetch(`${this.base}/api/solids`).then((r) => asJson<SolidSummary[]>(r));
  }

  views(solidId: number): Promise<ViewInfo[]> {
    return fetch(`${this.base}/api/solids/${solidId}/views`).then((r) =>
      asJson<ViewInfo[]>(r),
    );
  }

  imageUrl(viewId: string, overlay: boolean): string {
    return `${this.base}/api/views/${viewId}/image.png${overlay ? "?overlay=1" : ""}`;
  }

  castVote(viewId: string, voter: string, keep: boolean): Promise<VoteAck> {
    return fetch(`${this.base}/api/views/${viewId}/vote`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ voter, keep }),
    }).then((r) => asJson<VoteAck>(r));
  }

  export(allowPartial = false): Promise<Record<string, ExportedSplit>> {
    const query = allowPartial ? "?allow_partial=1" : "";
    return fetch(`${this.base}/api/export${query}`).then((r) =>
      asJson<Record<string, ExportedSplit>>(r),
    );
  }
}
