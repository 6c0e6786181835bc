/** Annotator evaluation form for a question report.
 *
 * The form is unsubmittable until every required field is set: six 1-4
 * score parameters, exactly 10 per-document relevance labels, and a
 * prioritization choice (which may be an explicit abstention).
 */

import {
  AnnotationBody,
  ApiClient,
  ApiError,
  RelevanceLabel,
  Report,
} from "./api";

export const SCORE_PARAMS = [
  "credibility",
  "accuracy",
  "logic",
  "completeness_depth",
  "conciseness",
  "communicativeness",
] as const;

export type ScoreParam = (typeof SCORE_PARAMS)[number];

export const RELEVANCE_LABELS: RelevanceLabel[] = [
  "Complete",
  "Partial",
  "Irrelevant",
];

export const DOC_COUNT = 10;

export class AnnotatorForm {
  private readonly doc: Document;
  private report: Report | null = null;
  private annotatorId = "";
  private scores = new Map<ScoreParam, number>();
  private docLabels = new Map<number, RelevanceLabel>();
  private prioritization: number | "abstain" | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly questionId: string,
  ) {
    this.doc = root.ownerDocument;
  }

  async load(): Promise<void> {
    this.report = await this.api.getReport(this.questionId);
    this.render();
  }

  isComplete(): boolean {
    return (
      this.annotatorId.trim() !== "" &&
      SCORE_PARAMS.every((param) => this.scores.has(param)) &&
      this.docLabels.size === DOC_COUNT &&
      this.prioritization !== null
    );
  }

  body(): AnnotationBody {
    if (!this.isComplete()) throw new Error("form is incomplete");
    const labels: RelevanceLabel[] = [];
    for (let i = 0; i < DOC_COUNT; i++) labels.push(this.docLabels.get(i)!);
    const scores = Object.fromEntries(this.scores) as Record<ScoreParam, number>;
    return {
      annotator_id: this.annotatorId.trim(),
      doc_labels: labels,
      prioritization: this.prioritization!,
      ...scores,
    };
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

  private radio(name: string, value: string, onPick: () => void): HTMLInputElement {
    const input = this.el("input");
    input.type = "radio";
    input.name = name;
    input.value = value;
    input.addEventListener("change", () => {
      onPick();
      this.refreshSubmit();
    });
    return input;
  }

  private render(): void {
    const report = this.report!;
    this.root.textContent = "";

    const panel = this.el("section", "report");
    if (report.question) panel.appendChild(this.el("p", "question", report.question));
    if (report.query) panel.appendChild(this.el("p", "query", report.query));
    panel.appendChild(this.el("p", "comment", report.comment));
    this.root.appendChild(panel);

    const form = this.el("form", "annotation");
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });

    const who = this.el("label", "annotator-id", "Annotator id ");
    const idInput = this.el("input");
    idInput.type = "text";
    idInput.name = "annotator_id";
    idInput.addEventListener("input", () => {
      this.annotatorId = idInput.value;
      this.refreshSubmit();
    });
    who.appendChild(idInput);
    form.appendChild(who);

    for (const param of SCORE_PARAMS) {
      const group = this.el("fieldset", `score ${param}`);
      group.appendChild(this.el("legend", undefined, param.replace("_", " / ")));
      for (let value = 1; value <= 4; value++) {
        const label = this.el("label", undefined, String(value));
        label.prepend(
          this.radio(param, String(value), () => this.scores.set(param, value)),
        );
        group.appendChild(label);
      }
      form.appendChild(group);
    }

    const docs = this.el("fieldset", "doc-labels");
    docs.appendChild(this.el("legend", undefined, "Document relevance"));
    for (let i = 0; i < DOC_COUNT; i++) {
      const doc = report.docs[i];
      const row = this.el("div", "doc-row");
      row.appendChild(
        this.el("span", "doc-title", doc ? `${doc.doc_id}: ${doc.title}` : `doc ${i + 1}`),
      );
      for (const label of RELEVANCE_LABELS) {
        const wrap = this.el("label", undefined, label);
        wrap.prepend(
          this.radio(`doc:${i}`, label, () => this.docLabels.set(i, label)),
        );
        row.appendChild(wrap);
      }
      docs.appendChild(row);
    }
    form.appendChild(docs);

    const prio = this.el("fieldset", "prioritization");
    prio.appendChild(this.el("legend", undefined, "Prioritization"));
    for (let value = 1; value <= 4; value++) {
      const label = this.el("label", undefined, String(value));
      label.prepend(
        this.radio("prioritization", String(value), () => {
          this.prioritization = value;
        }),
      );
      prio.appendChild(label);
    }
    const abstain = this.el("label", undefined, "abstain");
    abstain.prepend(
      this.radio("prioritization", "abstain", () => {
        this.prioritization = "abstain";
      }),
    );
    prio.appendChild(abstain);
    form.appendChild(prio);

    const submit = this.el("button", "submit", "Submit annotation");
    submit.type = "submit";
    submit.disabled = true;
    form.appendChild(submit);
    form.appendChild(this.el("p", "form-status"));
    this.root.appendChild(form);
  }

  private refreshSubmit(): void {
    const submit = this.root.querySelector("button.submit") as HTMLButtonElement;
    submit.disabled = !this.isComplete();
  }

  async submit(): Promise<void> {
    const status = this.root.querySelector(".form-status") as HTMLElement;
    if (!this.isComplete()) {
      status.textContent = "Fill in every field before submitting.";
      status.classList.add("error");
      return;
    }
    try {
      await this.api.postAnnotation(this.questionId, this.body());
    } catch (err) {
      status.textContent =
        err instanceof ApiError ? err.message : "Could not reach the server.";
      status.classList.add("error");
      return;
    }
    status.classList.remove("error");
    status.textContent = "Annotation stored.";
  }
}
