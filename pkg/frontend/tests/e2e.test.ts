/** End-to-end: the real UI components driven headlessly against a live
 * service process over HTTP. */

import { execFileSync, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const TESTS_DIR = dirname(fileURLToPath(import.meta.url));

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { AnnotationBody, ApiClient, ApiError } from "../src/api";
import { AnnotatorForm, SCORE_PARAMS } from "../src/annotator";
import { LearnerView } from "../src/learner";
import { click, flush, makeDom, waitFor } from "./helpers";

const PORT = 8765 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let dataDir = "";

async function waitForServer(timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const response = await fetch(`${BASE}/api/v1/courses`);
      if (response.ok) return;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) throw new Error("service did not come up");
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "examcoach-e2e-"));
  execFileSync("python3", [join(TESTS_DIR, "make_fixture.py"), dataDir]);
  server = spawn(
    "python3",
    ["-m", "examcoach.cli", "serve", "--data", dataDir, "--port", String(PORT)],
    { stdio: "ignore" },
  );
  await waitForServer();
});

afterAll(() => {
  server?.kill();
  if (dataDir) rmSync(dataDir, { recursive: true, force: true });
});

describe("learner flow against the live service", () => {
  it("drives answer -> reveal -> grade with grade controls inert pre-reveal", async () => {
    const { root } = makeDom();
    const api = new ApiClient(BASE);
    const view = new LearnerView(root, api, "e2e-user");
    await view.start();

    expect(root.querySelector(".stem")?.textContent).toContain("zawału serca");
    const grades = root.querySelectorAll<HTMLButtonElement>("button.grade");
    expect(grades.length).toBe(3);
    for (const button of grades) expect(button.disabled).toBe(true);
    expect(root.innerHTML).not.toContain("Correct answer");

    // grade clicks are ignored while disabled: server state stays consistent
    click(root.querySelector('button.grade[data-grade="know"]'));
    await flush();
    expect(root.querySelector(".error")).toBeNull();

    click(root.querySelector('button.choice[data-letter="A"]'));
    await waitFor(() => root.querySelector(".correct-letter") !== null);
    expect(root.querySelector(".correct-letter")?.textContent).toMatch(
      /^Correct answer: [A-E]$/,
    );
    expect(root.querySelectorAll(".comment a.source-link").length).toBeGreaterThan(0);
    for (const button of root.querySelectorAll<HTMLButtonElement>("button.grade")) {
      expect(button.disabled).toBe(false);
    }

    click(root.querySelector('button.grade[data-grade="know"]'));
    await waitFor(() => root.querySelector(".next-due") !== null);
    expect(root.querySelector(".next-due")?.textContent).toContain("due on day");

    click(root.querySelector("button.next"));
    await waitFor(() => root.querySelector(".stem") !== null);
    expect(root.querySelector(".stem")).not.toBeNull();
  });

  it("rejects an answer for an item that was never served", async () => {
    const api = new ApiClient(BASE);
    await expect(
      api.answer("fresh-user", "e2e-exam:1", "A"),
    ).rejects.toMatchObject({ status: 409 });
  });
});

function fullBody(overrides?: Partial<AnnotationBody>): AnnotationBody {
  const scores = Object.fromEntries(SCORE_PARAMS.map((p) => [p, 3]));
  return {
    annotator_id: "e2e-ann",
    doc_labels: Array(10).fill("Complete"),
    prioritization: "abstain",
    ...(scores as Pick<AnnotationBody, (typeof SCORE_PARAMS)[number]>),
    ...overrides,
  };
}

describe("annotator form against the live service", () => {
  it("refuses submission with 9 of 10 document labels", async () => {
    const { root } = makeDom();
    const api = new ApiClient(BASE);
    const form = new AnnotatorForm(root, api, "e2e-exam:1");
    await form.load();

    const idInput = root.querySelector(
      'input[name="annotator_id"]',
    ) as HTMLInputElement;
    idInput.value = "e2e-ann";
    const window = root.ownerDocument.defaultView!;
    idInput.dispatchEvent(new window.Event("input", { bubbles: true }));
    for (const param of SCORE_PARAMS) {
      click(root.querySelector(`input[name="${param}"][value="3"]`));
    }
    for (let i = 0; i < 9; i++) {
      click(root.querySelector(`input[name="doc:${i}"][value="Partial"]`));
    }
    click(root.querySelector('input[name="prioritization"][value="abstain"]'));

    const submit = root.querySelector("button.submit") as HTMLButtonElement;
    expect(submit.disabled).toBe(true);
    expect(form.isComplete()).toBe(false);

    // bypassing the client is caught server-side with a 422
    const nineLabels = fullBody();
    nineLabels.doc_labels = nineLabels.doc_labels.slice(0, 9);
    await expect(
      api.postAnnotation("e2e-exam:1", nineLabels),
    ).rejects.toMatchObject({ status: 422 });

    // the tenth label makes the form submittable end to end
    click(root.querySelector('input[name="doc:9"][value="Irrelevant"]'));
    expect(submit.disabled).toBe(false);
    click(submit);
    await waitFor(
      () => (root.querySelector(".form-status")?.textContent ?? "") !== "",
    );
    expect(root.querySelector(".form-status")?.textContent).toBe(
      "Annotation stored.",
    );
  });

  it("accepts prioritization abstention", async () => {
    const api = new ApiClient(BASE);
    const result = await api.postAnnotation(
      "e2e-exam:2",
      fullBody({ annotator_id: "e2e-ann2", prioritization: "abstain" }),
    );
    expect(result.stored).toBe(true);
  });

  it("talks only to documented /api/v1 endpoints", async () => {
    const api = new ApiClient(BASE);
    const report = await api.getReport("e2e-exam:3");
    expect(report.docs.length).toBe(10);
    try {
      await api.getReport("no-such-question");
      throw new Error("expected a 404");
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).status).toBe(404);
    }
  });
});
