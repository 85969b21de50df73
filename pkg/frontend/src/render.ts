/** Small rendering helpers kept free of app state for testability. */
import { RELATIONS, type Relation } from './types'
import { hotkeyForRelation } from './hotkeys'

function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;')
}

/** Escape the sentence, then turn the escaped marker tags into highlight
 * spans; entity markers are shown because they define the candidate pair. */
export function markedTextToHtml(markedText: string): string {
  return escapeHtml(markedText)
    .replace('&lt;e1&gt;', '<span class="e1">')
    .replace('&lt;/e1&gt;', '</span>')
    .replace('&lt;e2&gt;', '<span class="e2">')
    .replace('&lt;/e2&gt;', '</span>')
}

export function labelButtonsHtml(): string {
  return RELATIONS.map(
    (relation) =>
      `<button class="label-btn" data-label="${relation}">` +
      `<kbd>${hotkeyForRelation(relation as Relation)}</kbd> ${relation}</button>`,
  ).join('')
}

export function progressText(done: number, total: number): string {
  return `${done} / ${total} labelled`
}
