// Typed client for the laboratory service JSON interface under /api/v1.
// Every mutation the UI performs goes through a method on ApiClient; no
// view talks to the network directly.

export type Role = "Administrator" | "Teacher" | "Student";

export interface UserDoc {
  user_id: string;
  login: string;
  role: Role;
  display_name: string;
  active: boolean;
}

export interface GroupDoc {
  group_id: string;
  name: string;
  teacher_ids: string[];
  student_ids: string[];
}

export interface ParamSpecDoc {
  name: string;
  unit: string;
  min: number;
  max: number;
  default: number;
  scale: "linear" | "log";
}

export interface KindDoc {
  kind: string;
  params: ParamSpecDoc[];
}

export interface SlotDoc {
  slot: string;
  position: [number, number];
  default: string;
  kinds: KindDoc[];
}

export interface OutputDoc {
  channel: string;
  unit: string;
}

export interface TemplateDoc {
  template: string;
  lab_kind: string;
  title: string;
  discipline_tags: string[];
  slots: SlotDoc[];
  fixed: Record<string, unknown>;
  sim: ParamSpecDoc[];
  outputs: OutputDoc[];
}

export interface TemplateListItem {
  template: string;
  lab_kind: string;
  title: string;
  discipline_tags: string[];
}

export interface ConfigDoc {
  template: string;
  selections: Record<string, string>;
  params: Record<string, Record<string, number>>;
  sim: Record<string, number>;
}

export interface QuizQuestionDoc {
  question_id: string;
  text: string;
  choices: string[];
  correct_index?: number;
}

export interface CriterionCheckDoc {
  channel: string;
  probe?: number;
  expected?: number;
  rel_tol?: number;
  property?: string;
  threshold?: number;
  passed?: boolean;
  measured?: number | null;
  detail?: string;
}

export interface AssignmentDoc {
  assignment_id: string;
  group_id: string;
  template_id: string;
  instructions: string;
  references: string[];
  due: number;
  criteria: { checks: CriterionCheckDoc[] };
  quiz: QuizQuestionDoc[];
}

export interface ResultDoc {
  times: number[];
  channels: Record<string, number[]>;
  units: Record<string, string>;
}

export type RunStatus = "Pending" | "Running" | "Done" | "Failed";

export interface RunDoc {
  run_id: string;
  owner_id: string;
  config: ConfigDoc;
  status: RunStatus;
  result: ResultDoc | null;
  error: string | null;
  created: number;
  finished: number | null;
}

export type SubmissionStatus =
  | "Saved" | "Submitted" | "AutoChecked" | "TutorChecked" | "Certified";

export interface AutoReportDoc {
  checks: CriterionCheckDoc[];
  quiz: { total: number; correct: number };
}

export interface SubmissionDoc {
  submission_id: string;
  assignment_id: string;
  student_id: string;
  config: ConfigDoc;
  run_id: string;
  quiz_answers: number[] | null;
  status: SubmissionStatus;
  auto_score: number | null;
  auto_report: AutoReportDoc | null;
  tutor_comment: string | null;
  updated: number;
}

export interface ProgressRowDoc {
  student_id: string;
  login: string;
  display_name: string;
  assignment_id: string;
  template_id: string;
  status: SubmissionStatus | null;
  auto_score: number | null;
  certified: boolean;
}

export interface ViolationDoc {
  slot?: string;
  field?: string;
  param?: string | null;
  reason: string;
  detail: string;
}

/** Non-2xx response, decoded from the service error body. */
export class ApiFailure extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: string;
  readonly violations: ViolationDoc[];

  constructor(status: number, code: string, detail: string,
              violations: ViolationDoc[]) {
    super(`${code}: ${detail}`);
    this.name = "ApiFailure";
    this.status = status;
    this.code = code;
    this.detail = detail;
    this.violations = violations;
  }
}

/** The slice of fetch() the client needs; lets tests swap transports. */
export interface FetchResponseLike {
  ok: boolean;
  status: number;
  statusText: string;
  text(): Promise<string>;
}

export type FetchFn =
  (input: string, init?: RequestInit) => Promise<FetchResponseLike>;

export class ApiClient {
  token: string | null = null;
  private readonly base: string;
  private readonly fetchFn: FetchFn;

  constructor(base = "", fetchFn?: FetchFn) {
    this.base = base.replace(/\/+$/, "");
    // Bind explicitly: an unbound fetch loses its Window receiver.
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request<T>(method: string, path: string,
                           body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const init: RequestInit = { method, headers };
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    if (response.status === 204) return undefined as T;
    const text = await response.text();
    let payload: unknown = null;
    try {
      payload = text ? JSON.parse(text) : null;
    } catch {
      payload = null;
    }
    if (!response.ok) {
      const doc = (payload ?? {}) as {
        error?: string; detail?: string; violations?: ViolationDoc[];
      };
      throw new ApiFailure(response.status,
                           doc.error ?? `http_${response.status}`,
                           doc.detail ?? response.statusText,
                           doc.violations ?? []);
    }
    return payload as T;
  }

  // -- session ------------------------------------------------------------

  async login(login: string, password: string): Promise<UserDoc> {
    const doc = await this.request<{ token: string; user: UserDoc }>(
      "POST", "/api/v1/session", { login, password });
    this.token = doc.token;
    return doc.user;
  }

  // -- catalogue ----------------------------------------------------------

  listTemplates(): Promise<{ templates: TemplateListItem[] }> {
    return this.request("GET", "/api/v1/templates");
  }

  getTemplate(id: string): Promise<TemplateDoc> {
    return this.request("GET", `/api/v1/templates/${encodeURIComponent(id)}`);
  }

  // -- users and groups ---------------------------------------------------

  listUsers(): Promise<{ users: UserDoc[] }> {
    return this.request("GET", "/api/v1/users");
  }

  createUser(payload: { login: string; password: string; role: Role;
                        display_name: string }): Promise<UserDoc> {
    return this.request("POST", "/api/v1/users", payload);
  }

  deactivateUser(userId: string): Promise<UserDoc> {
    return this.request(
      "POST", `/api/v1/users/${encodeURIComponent(userId)}/deactivate`);
  }

  listGroups(): Promise<{ groups: GroupDoc[] }> {
    return this.request("GET", "/api/v1/groups");
  }

  createGroup(name: string): Promise<GroupDoc> {
    return this.request("POST", "/api/v1/groups", { name });
  }

  addTeacher(groupId: string, userId: string): Promise<GroupDoc> {
    return this.request(
      "POST", `/api/v1/groups/${encodeURIComponent(groupId)}/teachers`,
      { user: userId });
  }

  addStudent(groupId: string, userId: string): Promise<GroupDoc> {
    return this.request(
      "POST", `/api/v1/groups/${encodeURIComponent(groupId)}/students`,
      { user: userId });
  }

  // -- assignments --------------------------------------------------------

  listAssignments(groupId: string): Promise<{ assignments: AssignmentDoc[] }> {
    return this.request(
      "GET", `/api/v1/assignments?group=${encodeURIComponent(groupId)}`);
  }

  createAssignment(payload: {
    group: string; template: string; due: number; instructions?: string;
    references?: string[]; criteria?: { checks: CriterionCheckDoc[] };
    quiz?: QuizQuestionDoc[];
  }): Promise<AssignmentDoc> {
    return this.request("POST", "/api/v1/assignments", payload);
  }

  // -- runs ---------------------------------------------------------------

  requestRun(config: ConfigDoc): Promise<RunDoc> {
    return this.request("POST", "/api/v1/runs", config);
  }

  getRun(runId: string): Promise<RunDoc> {
    return this.request("GET", `/api/v1/runs/${encodeURIComponent(runId)}`);
  }

  csvPath(runId: string): string {
    return `${this.base}/api/v1/runs/${encodeURIComponent(runId)}/result.csv`;
  }

  async fetchCsv(runId: string): Promise<string> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchFn(this.csvPath(runId), { headers });
    if (!response.ok) {
      throw new ApiFailure(response.status, `http_${response.status}`,
                           "CSV export unavailable", []);
    }
    return response.text();
  }

  // -- submissions --------------------------------------------------------

  saveSubmission(payload: { assignment: string; config: ConfigDoc;
                            run: string; quiz_answers?: number[] }):
      Promise<SubmissionDoc> {
    return this.request("POST", "/api/v1/submissions", payload);
  }

  listSubmissions(assignmentId: string):
      Promise<{ submissions: SubmissionDoc[] }> {
    return this.request(
      "GET",
      `/api/v1/submissions?assignment=${encodeURIComponent(assignmentId)}`);
  }

  getSubmission(submissionId: string): Promise<SubmissionDoc> {
    return this.request(
      "GET", `/api/v1/submissions/${encodeURIComponent(submissionId)}`);
  }

  submitSubmission(submissionId: string): Promise<SubmissionDoc> {
    return this.request(
      "POST",
      `/api/v1/submissions/${encodeURIComponent(submissionId)}/submit`);
  }

  reviewSubmission(submissionId: string,
                   verdict: "TutorChecked" | "Certified",
                   comment?: string): Promise<SubmissionDoc> {
    return this.request(
      "POST",
      `/api/v1/submissions/${encodeURIComponent(submissionId)}/review`,
      comment === undefined ? { verdict } : { verdict, comment });
  }

  // -- reports ------------------------------------------------------------

  progress(groupId: string):
      Promise<{ group: string; rows: ProgressRowDoc[] }> {
    return this.request(
      "GET", `/api/v1/reports/progress?group=${encodeURIComponent(groupId)}`);
  }
}
