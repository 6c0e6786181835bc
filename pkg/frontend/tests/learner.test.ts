import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { LearnerView } from "../src/learner";
import { click, fakeLearningApi, flush, jsonResponse, makeDom } from "./helpers";

const COMMENT = "Typical finding is cough [doc:M1]. See also [doc:M2].";

function setup(apiOptions?: Parameters<typeof fakeLearningApi>[0]) {
  const { root } = makeDom();
  const fake = fakeLearningApi(apiOptions);
  const api = new ApiClient("http://svc", fake.fetchFn);
  const view = new LearnerView(root, api, "u1");
  return { root, view, fake };
}

describe("learner flow", () => {
  let root: HTMLElement;
  let view: LearnerView;

  beforeEach(async () => {
    ({ root, view } = setup());
    await view.start();
  });

  it("renders the question with grade buttons disabled pre-reveal", () => {
    expect(root.querySelector(".stem")?.textContent).toBe(
      "Which symptom is typical?",
    );
    const grades = root.querySelectorAll<HTMLButtonElement>("button.grade");
    expect(grades.length).toBe(3);
    for (const button of grades) expect(button.disabled).toBe(true);
    expect([...grades].map((b) => b.textContent)).toEqual([":(", ":|", ":)"]);
  });

  it("keeps the correct answer out of the DOM before an answer", () => {
    expect(root.innerHTML).not.toContain("Correct answer");
    expect(root.innerHTML).not.toContain(COMMENT);
    expect(root.querySelector(".correct")).toBeNull();
    expect(root.querySelector(".reveal")?.textContent).toBe("");
  });

  it("reveals correct letter, comment and sources after answering", async () => {
    click(root.querySelector('button.choice[data-letter="B"]'));
    await flush();

    expect(root.querySelector(".correct-letter")?.textContent).toBe(
      "Correct answer: C",
    );
    const correctButton = root.querySelector('button.choice[data-letter="C"]');
    expect(correctButton?.classList.contains("correct")).toBe(true);
    const chosenButton = root.querySelector('button.choice[data-letter="B"]');
    expect(chosenButton?.classList.contains("chosen")).toBe(true);

    expect(root.querySelector(".comment")?.textContent).toContain(
      "Typical finding is cough",
    );
    const links = root.querySelectorAll(".comment a.source-link");
    expect([...links].map((a) => (a as HTMLElement).dataset.docId)).toEqual([
      "M1",
      "M2",
    ]);
    expect(root.querySelectorAll("ul.sources li").length).toBe(2);

    for (const button of root.querySelectorAll<HTMLButtonElement>("button.grade")) {
      expect(button.disabled).toBe(false);
    }
  });

  it("opens the document view when a citation link is clicked", async () => {
    click(root.querySelector('button.choice[data-letter="A"]'));
    await flush();
    click(root.querySelector('.comment a.source-link[data-doc-id="M2"]'));
    await flush();

    const docView = root.querySelector(".doc-view") as HTMLElement;
    expect(docView.dataset.docId).toBe("M2");
    expect(docView.querySelector(".doc-title")?.textContent).toBe(
      "Guideline 2023",
    );
    expect(docView.querySelector(".doc-locator")?.textContent).toBe("gl:2023");
  });

  it("shows the next due date after grading, then loads the next item", async () => {
    click(root.querySelector('button.choice[data-letter="C"]'));
    await flush();
    click(root.querySelector('button.grade[data-grade="know"]'));
    await flush();

    expect(root.querySelector(".next-due")?.textContent).toContain(
      "due on day 101.00",
    );
    click(root.querySelector("button.next"));
    await flush();
    expect(root.querySelector(".stem")?.textContent).toBe(
      "Second question stem",
    );
  });

  it("shows the all-done state when the queue is empty", async () => {
    const empty = setup({ items: [] });
    await empty.view.start();
    expect(empty.root.querySelector(".all-done")?.textContent).toContain(
      "All done for today",
    );
  });
});

describe("learner error handling", () => {
  it("surfaces out-of-order rejections as a recoverable state", async () => {
    const { root } = makeDom();
    let healthy = false;
    const fake = fakeLearningApi();
    const api = new ApiClient("http://svc", async (url, init) => {
      // first answer attempt is rejected as out-of-order by the server
      if (!healthy && /\/answer$/.test(url)) {
        healthy = true;
        return jsonResponse(409, { detail: "item was not served" });
      }
      return fake.fetchFn(url, init);
    });
    const view = new LearnerView(root, api, "u1");
    await view.start();

    click(root.querySelector('button.choice[data-letter="A"]'));
    await flush();
    expect(root.querySelector(".error")?.textContent).toBe(
      "item was not served",
    );

    // the retry button resynchronizes with the queue
    click(root.querySelector("button.retry"));
    await flush();
    expect(root.querySelector(".stem")).not.toBeNull();
    for (const button of root.querySelectorAll<HTMLButtonElement>("button.grade")) {
      expect(button.disabled).toBe(true);
    }
  });
});
