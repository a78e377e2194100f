import type {
  GroupingDoc,
  InstanceSummary,
  JobDoc,
  MoveRejection,
  MoveResponse,
  OverlapMatrixDoc,
  ScheduleDoc,
  ValidationDoc,
  WhatIfDoc,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`API error ${status}`);
  }

  get moveRejection(): MoveRejection | null {
    if (this.status === 409 && this.detail && typeof this.detail === "object" && "rule" in this.detail) {
      return this.detail as MoveRejection;
    }
    return null;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, {
      headers: { "content-type": "application/json" },
      ...init,
    });
  } catch (err) {
    throw new ApiError(0, String(err));
  }
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    throw new ApiError(response.status, body && typeof body === "object" ? (body as { detail?: unknown }).detail : body);
  }
  return body as T;
}

export interface UploadPayload {
  enrollments: string;
  sections: string;
  constraints?: string;
  coordinated?: string;
}

// Thin typed client: one method per service endpoint.
export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  health(): Promise<{ status: string }> {
    return request(this.url("/health"));
  }

  uploadInstance(payload: UploadPayload): Promise<{ instance_id: string; revision: number }> {
    return request(this.url("/instances"), { method: "POST", body: JSON.stringify(payload) });
  }

  instanceSummary(instanceId: string): Promise<InstanceSummary> {
    return request(this.url(`/instances/${instanceId}`));
  }

  validation(instanceId: string): Promise<ValidationDoc> {
    return request(this.url(`/instances/${instanceId}/validation`));
  }

  groups(instanceId: string): Promise<GroupingDoc> {
    return request(this.url(`/instances/${instanceId}/groups`));
  }

  editGroups(instanceId: string, edits: [string, string][]): Promise<GroupingDoc> {
    return request(this.url(`/instances/${instanceId}/groups`), {
      method: "PUT",
      body: JSON.stringify({ edits }),
    });
  }

  overlapMatrix(instanceId: string, historical?: string): Promise<OverlapMatrixDoc> {
    const query = historical ? `?historical=${encodeURIComponent(historical)}` : "";
    return request(this.url(`/instances/${instanceId}/overlap-matrix${query}`));
  }

  putConstraints(
    instanceId: string,
    constraints: {
      pins?: Record<string, number | string>;
      blocks?: Record<string, (number | string)[]>;
      unavailable_slots?: (number | string)[];
      m1?: number | null;
    },
  ): Promise<{ revision: number }> {
    return request(this.url(`/instances/${instanceId}/constraints`), {
      method: "PUT",
      body: JSON.stringify(constraints),
    });
  }

  startPortfolio(
    instanceId: string,
    options: { k_range?: number[]; seed?: number; phase2_limit?: number; phase1_initial_limit?: number },
  ): Promise<{ job_id: string }> {
    return request(this.url(`/instances/${instanceId}/portfolio`), {
      method: "POST",
      body: JSON.stringify(options),
    });
  }

  job(jobId: string): Promise<JobDoc> {
    return request(this.url(`/jobs/${jobId}`));
  }

  createSchedule(instanceId: string, assignment: Record<string, number>, name?: string): Promise<ScheduleDoc> {
    return request(this.url(`/instances/${instanceId}/schedules`), {
      method: "POST",
      body: JSON.stringify({ assignment, name }),
    });
  }

  schedule(scheduleId: string): Promise<ScheduleDoc> {
    return request(this.url(`/schedules/${scheduleId}`));
  }

  move(scheduleId: string, group: string, targetSlot: number): Promise<MoveResponse> {
    return request(this.url(`/schedules/${scheduleId}/moves`), {
      method: "POST",
      body: JSON.stringify({ group, target_slot: targetSlot }),
    });
  }

  undo(scheduleId: string): Promise<MoveResponse> {
    return request(this.url(`/schedules/${scheduleId}/undo`), { method: "POST" });
  }

  whatIf(instanceId: string, dayDelta: number, limits?: { phase2_limit?: number; k_fixed?: number }): Promise<WhatIfDoc> {
    return request(this.url(`/instances/${instanceId}/whatif`), {
      method: "POST",
      body: JSON.stringify({ day_delta: dayDelta, ...limits }),
    });
  }
}
