/** UI-agnostic flows over the service protocol.
 *
 * The labeling flow fetches one item at a time, asks a chooser for the
 * label, and persists it before advancing (server ack required). Transport
 * failures are retried with backoff and surfaced through onRetry; a label
 * choice is never dropped silently.
 */
import { ApiError, type ServiceClient } from './api'
import type { Disagreement, ItemView, Relation } from './types'

export interface LabelingCallbacks {
  onItem?: (item: ItemView, done: number, total: number) => void
  onSubmitted?: (item: ItemView, label: Relation) => void
  onRetry?: (attempt: number, error: unknown) => void
  onDone?: (total: number) => void
}

export interface RetryPolicy {
  attempts: number
  delayMs: number
}

const DEFAULT_RETRY: RetryPolicy = { attempts: 4, delayMs: 150 }

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms))

async function withRetries<T>(
  action: () => Promise<T>,
  policy: RetryPolicy,
  onRetry?: (attempt: number, error: unknown) => void,
): Promise<T> {
  let attempt = 0
  for (;;) {
    try {
      return await action()
    } catch (error) {
      // Protocol rejections (4xx) are final; only transport errors retry.
      if (error instanceof ApiError) throw error
      attempt += 1
      if (attempt >= policy.attempts) throw error
      onRetry?.(attempt, error)
      await sleep(policy.delayMs * attempt)
    }
  }
}

/** Label every pending item for one annotator; resolves with the number of
 * labels submitted in this session. */
export async function labelingFlow(
  client: ServiceClient,
  taskId: string,
  annotatorId: string,
  choose: (item: ItemView) => Relation | Promise<Relation>,
  callbacks: LabelingCallbacks = {},
  retry: RetryPolicy = DEFAULT_RETRY,
): Promise<number> {
  let submitted = 0
  for (;;) {
    const next = await withRetries(
      () => client.nextItem(taskId, annotatorId),
      retry,
      callbacks.onRetry,
    )
    if (next.done || !next.item) {
      callbacks.onDone?.(next.progress.total)
      return submitted
    }
    const item = next.item
    callbacks.onItem?.(item, next.progress.done, next.progress.total)
    const label = await choose(item)
    await withRetries(
      () =>
        client.submitLabel({
          task_id: taskId,
          instance_id: item.instance_id,
          annotator_id: annotatorId,
          label,
        }),
      retry,
      callbacks.onRetry,
    )
    submitted += 1
    callbacks.onSubmitted?.(item, label)
  }
}

/** Resolve every open disagreement with the resolver's choices, then export.
 * The resolver sees both annotator labels side by side. */
export async function adjudicationFlow(
  client: ServiceClient,
  taskId: string,
  resolver: string,
  decide: (disagreement: Disagreement) => Relation | Promise<Relation>,
): Promise<Record<string, string>> {
  const { items } = await client.disagreements(taskId)
  for (const disagreement of items) {
    if (disagreement.adjudicated) continue
    const finalLabel = await decide(disagreement)
    await client.adjudicate({
      task_id: taskId,
      instance_id: disagreement.instance_id,
      final_label: finalLabel,
      resolver,
    })
  }
  const exported = await client.exportGold(taskId)
  return exported.labels
}

export interface AgreementPanelData {
  kappa: number
  doubleLabelled: number
  totalItems: number
  disagreementsByRelation: Record<string, number>
}

/** Kappa plus per-relation disagreement counts (a disagreement counts once
 * under each of the two labels involved). */
export async function agreementPanel(
  client: ServiceClient,
  taskId: string,
): Promise<AgreementPanelData> {
  const agreement = await client.agreement(taskId)
  const { items } = await client.disagreements(taskId)
  const byRelation: Record<string, number> = {}
  for (const disagreement of items) {
    for (const label of Object.values(disagreement.labels)) {
      byRelation[label] = (byRelation[label] ?? 0) + 1
    }
  }
  return {
    kappa: agreement.kappa,
    doubleLabelled: agreement.double_labelled,
    totalItems: agreement.total_items,
    disagreementsByRelation: byRelation,
  }
}
