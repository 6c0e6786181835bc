/** Learner review flow: answer -> reveal -> grade.
 *
 * Server contract mirrored in the DOM: the correct answer is never
 * rendered before an answer is submitted, and the grade buttons stay
 * disabled until the reveal.
 */

import { ApiClient, ApiError, Grade, NextItem, Reveal, SourceRef } from "./api";

const CITATION_MARKER = /\[doc:([^\]\s]+)\]/g;

export const GRADE_BUTTONS: ReadonlyArray<{ label: string; grade: Grade }> = [
  { label: ":(", grade: "dont_know" },
  { label: ":|", grade: "unsure" },
  { label: ":)", grade: "know" },
];

export class LearnerView {
  private readonly doc: Document;
  private item: NextItem | null = null;
  private reveal: Reveal | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly userId: string,
  ) {
    this.doc = root.ownerDocument;
  }

  /** Load the next due item and render the question view. */
  async start(): Promise<void> {
    this.reveal = null;
    try {
      this.item = await this.api.nextItem(this.userId);
    } catch (err) {
      this.renderError(err);
      return;
    }
    this.render();
  }

  private el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
  ): HTMLElementTagNameMap[K] {
    const node = this.doc.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
  }

  private render(): void {
    this.root.textContent = "";
    if (this.item === null) {
      this.root.appendChild(
        this.el("p", "all-done", "All done for today — nothing is due."),
      );
      return;
    }
    const item = this.item;

    this.root.appendChild(this.el("p", "stem", item.stem));

    const choices = this.el("div", "choices");
    for (const letter of Object.keys(item.choices).sort()) {
      const button = this.el("button", "choice", `${letter}. ${item.choices[letter]}`);
      button.dataset.letter = letter;
      button.addEventListener("click", () => {
        void this.submitAnswer(letter);
      });
      choices.appendChild(button);
    }
    this.root.appendChild(choices);

    // reveal panel exists but is empty pre-answer; grade buttons inert
    this.root.appendChild(this.el("div", "reveal"));
    const grades = this.el("div", "grades");
    for (const { label, grade } of GRADE_BUTTONS) {
      const button = this.el("button", "grade", label);
      button.dataset.grade = grade;
      button.disabled = true;
      button.addEventListener("click", () => {
        void this.submitGrade(grade);
      });
      grades.appendChild(button);
    }
    this.root.appendChild(grades);
    this.root.appendChild(this.el("div", "status"));
    this.root.appendChild(this.el("div", "doc-view"));
  }

  private async submitAnswer(letter: string): Promise<void> {
    if (this.item === null || this.reveal !== null) return;
    try {
      this.reveal = await this.api.answer(this.userId, this.item.item_id, letter);
    } catch (err) {
      this.renderError(err);
      return;
    }
    this.renderReveal(this.reveal);
  }

  private renderReveal(reveal: Reveal): void {
    for (const button of this.root.querySelectorAll<HTMLButtonElement>("button.choice")) {
      button.disabled = true;
      if (button.dataset.letter === reveal.correct) button.classList.add("correct");
      else if (button.dataset.letter === reveal.chosen) button.classList.add("chosen");
    }

    const panel = this.root.querySelector(".reveal") as HTMLElement;
    panel.textContent = "";
    panel.appendChild(
      this.el("p", "correct-letter", `Correct answer: ${reveal.correct}`),
    );
    panel.appendChild(this.renderComment(reveal));

    const sourceList = this.el("ul", "sources");
    for (const source of reveal.sources) {
      const row = this.el("li");
      row.appendChild(this.sourceLink(source));
      sourceList.appendChild(row);
    }
    panel.appendChild(sourceList);

    for (const button of this.root.querySelectorAll<HTMLButtonElement>("button.grade")) {
      button.disabled = false;
    }
  }

  /** Comment body with [doc:ID] markers turned into clickable source links. */
  private renderComment(reveal: Reveal): HTMLElement {
    const byId = new Map(reveal.sources.map((s) => [s.doc_id, s]));
    const paragraph = this.el("p", "comment");
    let cursor = 0;
    for (const match of reveal.comment.matchAll(CITATION_MARKER)) {
      paragraph.appendChild(
        this.doc.createTextNode(reveal.comment.slice(cursor, match.index)),
      );
      const source = byId.get(match[1]);
      if (source) paragraph.appendChild(this.sourceLink(source));
      else paragraph.appendChild(this.doc.createTextNode(match[0]));
      cursor = (match.index ?? 0) + match[0].length;
    }
    paragraph.appendChild(this.doc.createTextNode(reveal.comment.slice(cursor)));
    return paragraph;
  }

  private sourceLink(source: SourceRef): HTMLAnchorElement {
    const link = this.el("a", "source-link", source.title);
    link.href = "#doc-" + source.doc_id;
    link.dataset.docId = source.doc_id;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      this.openDocument(source);
    });
    return link;
  }

  private openDocument(source: SourceRef): void {
    const view = this.root.querySelector(".doc-view") as HTMLElement;
    view.textContent = "";
    view.dataset.docId = source.doc_id;
    view.appendChild(this.el("h3", "doc-title", source.title));
    if (source.url_or_locator) {
      view.appendChild(this.el("p", "doc-locator", source.url_or_locator));
    }
  }

  private async submitGrade(grade: Grade): Promise<void> {
    if (this.item === null || this.reveal === null) return;
    let result;
    try {
      result = await this.api.grade(this.userId, this.item.item_id, grade);
    } catch (err) {
      this.renderError(err);
      return;
    }
    for (const button of this.root.querySelectorAll<HTMLButtonElement>("button.grade")) {
      button.disabled = true;
    }
    const status = this.root.querySelector(".status") as HTMLElement;
    status.textContent = "";
    status.appendChild(
      this.el("p", "next-due", `Next review: ${formatDue(result.due)}`),
    );
    const next = this.el("button", "next", "Next question");
    next.addEventListener("click", () => {
      void this.start();
    });
    status.appendChild(next);
  }

  /** Server rejections (e.g. out-of-order events) are recoverable: the
   * view offers a retry that resynchronizes with the queue. */
  private renderError(err: unknown): void {
    this.root.textContent = "";
    const message =
      err instanceof ApiError ? err.message : "Could not reach the server.";
    this.root.appendChild(this.el("p", "error", message));
    const retry = this.el("button", "retry", "Try again");
    retry.addEventListener("click", () => {
      void this.start();
    });
    this.root.appendChild(retry);
  }
}

function formatDue(dueDays: number): string {
  return `due on day ${dueDays.toFixed(2)}`;
}
