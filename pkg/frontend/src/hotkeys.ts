/** Keyboard layout: digits 1..9 then 0 select the ten relations in their
 * fixed enum order, so a whole batch is labelable without the mouse. */
import { RELATIONS, type Relation } from './types'

const KEY_ORDER = ['1', '2', '3', '4', '5', '6', '7', '8', '9', '0'] as const

export const HOTKEY_TO_RELATION: ReadonlyMap<string, Relation> = new Map(
  KEY_ORDER.map((key, i) => [key, RELATIONS[i] as Relation]),
)

export function relationForKey(key: string): Relation | undefined {
  return HOTKEY_TO_RELATION.get(key)
}

export function hotkeyForRelation(relation: Relation): string {
  const index = RELATIONS.indexOf(relation)
  return KEY_ORDER[index] as string
}

/** Window-level handler factory; ignores keystrokes aimed at form fields. */
export function makeKeydownHandler(onLabel: (label: Relation) => void) {
  return (event: KeyboardEvent): void => {
    const target = event.target as HTMLElement | null
    if (target && (target.tagName === 'INPUT' || target.tagName === 'TEXTAREA')) return
    const relation = relationForKey(event.key)
    if (relation) {
      event.preventDefault()
      onLabel(relation)
    }
  }
}
