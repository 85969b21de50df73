/** Typed client for the annotation service wire protocol.
 *
 * Every call is a plain request/response over HTTP with JSON payloads;
 * errors come back as {error: {code, message, offending_ids}} and are
 * rethrown as ApiError so flows can distinguish retryable transport
 * failures (TypeError from fetch) from protocol rejections.
 */
import type {
  AgreementResponse,
  Disagreement,
  InstanceRecord,
  NextItemResponse,
  ServiceError,
} from './types'

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: ServiceError,
  ) {
    super(`${detail.code}: ${detail.message}`)
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token?: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private headers(json: boolean): Record<string, string> {
    const headers: Record<string, string> = {}
    if (json) headers['Content-Type'] = 'application/json'
    if (this.token) headers['X-Annot-Token'] = this.token
    return headers
  }

  private async call<T>(method: 'GET' | 'POST', path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: this.headers(body !== undefined),
      body: body === undefined ? undefined : JSON.stringify(body),
    })
    const payload = (await response.json()) as T & { error?: ServiceError }
    if (!response.ok) {
      throw new ApiError(response.status, payload.error ?? {
        code: 'unknown',
        message: `HTTP ${response.status}`,
        offending_ids: [],
      })
    }
    return payload
  }

  createTask(options: {
    items: InstanceRecord[]
    annotators: [string, string]
    guidelines: string
    seed?: number
    task_id?: string
  }): Promise<{ task_id: string; n_items: number }> {
    return this.call('POST', '/create-task', options)
  }

  nextItem(taskId: string, annotator: string): Promise<NextItemResponse> {
    const query = `task=${encodeURIComponent(taskId)}&annotator=${encodeURIComponent(annotator)}`
    return this.call('GET', `/next-item?${query}`)
  }

  submitLabel(options: {
    task_id: string
    instance_id: string
    annotator_id: string
    label: string
  }): Promise<{ ok: boolean; replaced: boolean }> {
    return this.call('POST', '/submit-label', options)
  }

  agreement(taskId: string): Promise<AgreementResponse> {
    return this.call('GET', `/agreement?task=${encodeURIComponent(taskId)}`)
  }

  disagreements(taskId: string): Promise<{ items: Disagreement[] }> {
    return this.call('GET', `/disagreements?task=${encodeURIComponent(taskId)}`)
  }

  adjudicate(options: {
    task_id: string
    instance_id: string
    final_label: string
    resolver: string
    force?: boolean
  }): Promise<{ ok: boolean }> {
    return this.call('POST', '/adjudicate', options)
  }

  exportGold(taskId: string): Promise<{ task_id: string; labels: Record<string, string> }> {
    return this.call('POST', `/export?task=${encodeURIComponent(taskId)}`)
  }
}
