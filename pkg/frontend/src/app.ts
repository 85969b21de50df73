/** Browser entry point: wires the flows to the DOM.
 *
 * One session per annotator; the UI advances only after the service acks a
 * submit (optimistic rendering is limited to disabling the buttons).
 */
import { ServiceClient } from './api'
import { makeKeydownHandler } from './hotkeys'
import { labelButtonsHtml, markedTextToHtml, progressText } from './render'
import { agreementPanel, labelingFlow } from './session'
import { isRelation, type ItemView, type Relation } from './types'

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing element #${id}`)
  return node as T
}

type Resolver = (label: Relation) => void

class App {
  private client: ServiceClient | null = null
  private pending: Resolver | null = null

  start(): void {
    el<HTMLDivElement>('labels').innerHTML = labelButtonsHtml()
    el<HTMLButtonElement>('connect').addEventListener('click', () => void this.connect())
    el<HTMLDivElement>('labels').addEventListener('click', (event) => {
      const target = event.target as HTMLElement
      const button = target.closest('button[data-label]') as HTMLButtonElement | null
      const label = button?.dataset.label
      if (label && isRelation(label)) this.choose(label)
    })
    window.addEventListener('keydown', makeKeydownHandler((label) => this.choose(label)))
  }

  private choose(label: Relation): void {
    if (!this.pending) return
    const resolve = this.pending
    this.pending = null
    resolve(label)
  }

  private banner(text: string, kind: 'info' | 'error' = 'info'): void {
    const banner = el<HTMLDivElement>('banner')
    banner.textContent = text
    banner.className = kind
    banner.hidden = !text
  }

  private async connect(): Promise<void> {
    const base = el<HTMLInputElement>('base-url').value || window.location.origin
    const token = el<HTMLInputElement>('token').value || undefined
    const taskId = el<HTMLInputElement>('task-id').value
    const annotator = el<HTMLInputElement>('annotator-id').value
    this.client = new ServiceClient(base, token)
    const client = this.client
    el<HTMLDivElement>('setup').hidden = true
    el<HTMLDivElement>('workspace').hidden = false
    try {
      const submitted = await labelingFlow(
        client,
        taskId,
        annotator,
        (item) => this.present(item),
        {
          onItem: (item, done, total) => {
            el<HTMLDivElement>('sentence').innerHTML = markedTextToHtml(item.marked_text)
            el<HTMLDivElement>('progress').textContent = progressText(done, total)
          },
          onSubmitted: () => this.banner(''),
          onRetry: (attempt) =>
            this.banner(`connection trouble, retrying (attempt ${attempt})…`, 'error'),
          onDone: (total) => {
            el<HTMLDivElement>('sentence').textContent = 'All items labelled. Danke!'
            el<HTMLDivElement>('progress').textContent = progressText(total, total)
          },
        },
      )
      this.banner(`session complete: ${submitted} labels submitted`)
      await this.showAgreement(taskId)
    } catch (error) {
      this.banner(String(error), 'error')
    }
  }

  private present(item: ItemView): Promise<Relation> {
    return new Promise((resolve) => {
      this.pending = resolve
    })
  }

  private async showAgreement(taskId: string): Promise<void> {
    if (!this.client) return
    try {
      const panel = await agreementPanel(this.client, taskId)
      const rows = Object.entries(panel.disagreementsByRelation)
        .map(([relation, count]) => `${relation}: ${count}`)
        .join(', ')
      el<HTMLDivElement>('agreement').textContent =
        `kappa ${panel.kappa.toFixed(2)} over ${panel.doubleLabelled}/${panel.totalItems} ` +
        (rows ? `— disagreements by label: ${rows}` : '— no disagreements')
    } catch {
      // agreement needs the admin token; annotators simply don't see it
      el<HTMLDivElement>('agreement').textContent = ''
    }
  }
}

new App().start()
