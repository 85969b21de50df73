/** Shared protocol types for the annotation service. */

export const RELATIONS = [
  'birthdate',
  'birthplace',
  'child',
  'deathdate',
  'deathplace',
  'educated',
  'occupation',
  'other',
  'parent',
  'sibling',
] as const

export type Relation = (typeof RELATIONS)[number]

export interface ItemView {
  instance_id: string
  marked_text: string
  method: string
}

export interface Progress {
  done: number
  total: number
}

export interface NextItemResponse {
  done: boolean
  item?: ItemView
  progress: Progress
  guidelines?: string
}

export interface AgreementResponse {
  kappa: number
  double_labelled: number
  disagreements: number
  total_items: number
}

export interface Disagreement {
  instance_id: string
  marked_text: string
  labels: Record<string, string>
  adjudicated: string | null
}

export interface ServiceError {
  code: string
  message: string
  offending_ids: string[]
}

export interface InstanceRecord {
  instance_id: string
  article_id: number
  sentence_index: number
  marked_text: string
  e1_start: number
  e1_end: number
  e2_start: number
  e2_end: number
  label: string
  method: string
  matched_key: string | null
}

export function isRelation(value: string): value is Relation {
  return (RELATIONS as readonly string[]).includes(value)
}
