/** Browser entry point: mounts the learner flow or the annotator form
 * depending on the URL hash (#learn/<user> or #annotate/<question_id>).
 * The API base URL comes from the page's own origin.
 */

import { AnnotatorForm } from "./annotator";
import { ApiClient } from "./api";
import { LearnerView } from "./learner";

export function mount(root: HTMLElement, baseUrl: string, hash: string): void {
  const api = new ApiClient(baseUrl);
  const [route, argument] = hash.replace(/^#/, "").split("/", 2);
  if (route === "annotate" && argument) {
    void new AnnotatorForm(root, api, argument).load();
  } else {
    void new LearnerView(root, api, argument || "learner").start();
  }
}

declare const window: Window | undefined;

if (typeof window !== "undefined" && typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) mount(root, window.location.origin, window.location.hash);
}
