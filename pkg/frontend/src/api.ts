/** Typed client for the learning/annotation HTTP API (all under /api/v1). */

export type Grade = "dont_know" | "unsure" | "know";

export interface CourseSummary {
  course_id: string;
  specialty: string;
  session_years: string[];
  item_count: number;
}

export interface NextItem {
  item_id: string;
  stem: string;
  choices: Record<string, string>;
}

export interface SourceRef {
  doc_id: string;
  title: string;
  url_or_locator: string;
}

export interface Reveal {
  item_id: string;
  chosen: string;
  correct: string;
  comment: string;
  sources: SourceRef[];
}

export interface GradeResult {
  item_id: string;
  due: number;
}

export interface ReportDoc {
  doc_id: string;
  title: string;
  snippet?: string;
  paragraph?: string;
}

export interface Report {
  question_id: string;
  question?: string;
  query?: string;
  comment: string;
  docs: ReportDoc[];
  citations?: string[];
}

export type RelevanceLabel = "Complete" | "Partial" | "Irrelevant";

export interface AnnotationBody {
  annotator_id: string;
  doc_labels: RelevanceLabel[];
  prioritization: number | "abstain";
  credibility: number;
  accuracy: number;
  logic: number;
  completeness_depth: number;
  conciseness: number;
  communicativeness: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (body && body.detail !== undefined) return String(body.detail);
  } catch {
    /* non-JSON error body */
  }
  return response.statusText || `HTTP ${response.status}`;
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchFn;

  constructor(baseUrl: string, fetchFn?: FetchFn) {
    this.base = baseUrl.replace(/\/+$/, "") + "/api/v1";
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T | null> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    if (response.status === 204) return null;
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as T;
  }

  listCourses(): Promise<CourseSummary[]> {
    return this.request<CourseSummary[]>("GET", "/courses") as Promise<
      CourseSummary[]
    >;
  }

  /** Next due item for the user, or null when the queue is empty (204). */
  nextItem(userId: string): Promise<NextItem | null> {
    return this.request<NextItem>(
      "POST",
      `/users/${encodeURIComponent(userId)}/next`,
    );
  }

  answer(userId: string, itemId: string, letter: string): Promise<Reveal> {
    return this.request<Reveal>(
      "POST",
      `/users/${encodeURIComponent(userId)}/items/${encodeURIComponent(itemId)}/answer`,
      { letter },
    ) as Promise<Reveal>;
  }

  grade(userId: string, itemId: string, grade: Grade): Promise<GradeResult> {
    return this.request<GradeResult>(
      "POST",
      `/users/${encodeURIComponent(userId)}/items/${encodeURIComponent(itemId)}/grade`,
      { grade },
    ) as Promise<GradeResult>;
  }

  getReport(questionId: string): Promise<Report> {
    return this.request<Report>(
      "GET",
      `/reports/${encodeURIComponent(questionId)}`,
    ) as Promise<Report>;
  }

  postAnnotation(
    questionId: string,
    body: AnnotationBody,
  ): Promise<{ stored: boolean; annotator_id: string }> {
    return this.request(
      "POST",
      `/reports/${encodeURIComponent(questionId)}/annotations`,
      body,
    ) as Promise<{ stored: boolean; annotator_id: string }>;
  }
}
