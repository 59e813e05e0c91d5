/** View-model store.  The view state is always the last server response;
 * mutations are serialized client-side so at most one is in flight. */

import {
  Api,
  ApiError,
  AuditReportDoc,
  Envelope,
  FixtureEntry,
  ProblemDoc,
  ProfileDoc,
} from "./api.js";

export interface FrameShiftState {
  offset: number;
  report: AuditReportDoc;
}

export interface ViewState {
  envelope: Envelope | null;
  fixtures: FixtureEntry[];
  auditReport: AuditReportDoc | null;
  frameShift: FrameShiftState | null;
  toast: string | null;
  busy: boolean;
}

type Listener = (state: ViewState) => void;
type Task = () => Promise<void>;

interface QueueEntry {
  task: Task;
  settled: () => void;
}

export class Store {
  private state: ViewState = {
    envelope: null,
    fixtures: [],
    auditReport: null,
    frameShift: null,
    toast: null,
    busy: false,
  };
  private listeners: Listener[] = [];
  private queue: QueueEntry[] = [];
  private inFlight = false;

  constructor(private readonly api: Api) {}

  get current(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  private fail(err: unknown): void {
    const message =
      err instanceof ApiError ? err.message : `unexpected error: ${String(err)}`;
    // the previous envelope is kept untouched: an error never changes the view
    this.emit({ toast: message, busy: false });
  }

  /** Serialize mutations: one in flight, later ones queued in order.  The
   * returned promise settles only once the mutation has fully left the queue. */
  private enqueue(task: Task): Promise<void> {
    return new Promise((settled) => {
      this.queue.push({ task, settled });
      void this.pump();
    });
  }

  private async pump(): Promise<void> {
    if (this.inFlight) return;
    const entry = this.queue.shift();
    if (!entry) return;
    this.inFlight = true;
    this.emit({ busy: true });
    try {
      await entry.task();
    } finally {
      this.inFlight = false;
      if (this.queue.length === 0) this.emit({ busy: false });
      entry.settled();
      void this.pump();
    }
  }

  get pendingMutations(): number {
    return this.queue.length + (this.inFlight ? 1 : 0);
  }

  async loadFixtures(): Promise<void> {
    try {
      const fixtures = await this.api.listFixtures();
      this.emit({ fixtures, toast: null });
    } catch (err) {
      this.fail(err);
    }
  }

  async openFixture(fid: string, decision: number): Promise<void> {
    try {
      const envelope = await this.api.fixtureSession(fid, decision);
      this.emit({
        envelope,
        auditReport: null,
        frameShift: null,
        toast: null,
      });
    } catch (err) {
      this.fail(err);
    }
  }

  async openProblem(problem: ProblemDoc): Promise<void> {
    try {
      const envelope = await this.api.createSession(problem);
      this.emit({
        envelope,
        auditReport: null,
        frameShift: null,
        toast: null,
      });
    } catch (err) {
      this.fail(err);
    }
  }

  toggleMark(prospect: string, index: number, flag: boolean): Promise<void> {
    return this.enqueue(async () => {
      const envelope = this.state.envelope;
      if (!envelope) return;
      try {
        const next = await this.api.setMark(envelope.session.id, prospect, index, flag);
        this.emit({ envelope: next, toast: null });
      } catch (err) {
        this.fail(err);
      }
    });
  }

  applyProfile(profile: ProfileDoc): Promise<void> {
    return this.enqueue(async () => {
      const envelope = this.state.envelope;
      if (!envelope) return;
      try {
        const next = await this.api.applyProfile(envelope.session.id, profile);
        this.emit({ envelope: next, toast: null });
      } catch (err) {
        this.fail(err);
      }
    });
  }

  /** Editing a value/probability means a fresh session for the edited problem,
   * then re-applying the current marks through the same serialized queue. */
  editOutcome(
    prospect: string,
    index: number,
    patch: { value?: number; p?: number },
  ): Promise<void> {
    return this.enqueue(async () => {
      const envelope = this.state.envelope;
      if (!envelope) return;
      const problem: ProblemDoc = {
        prospects: envelope.session.problem.prospects.map((pr) => ({
          name: pr.name,
          outcomes: pr.outcomes.map((o, i) =>
            pr.name === prospect && i === index
              ? { value: patch.value ?? o.value, p: patch.p ?? o.p }
              : { value: o.value, p: o.p },
          ),
        })),
      };
      const marks = envelope.session.marking;
      try {
        let next = await this.api.createSession(problem);
        for (const [name, flags] of Object.entries(marks)) {
          for (let i = 0; i < flags.length; i += 1) {
            if (flags[i]) {
              next = await this.api.setMark(next.session.id, name, i, true);
            }
          }
        }
        this.emit({
          envelope: next,
          auditReport: null,
          frameShift: null,
          toast: null,
        });
      } catch (err) {
        this.fail(err);
      }
    });
  }

  async runTransitivity(mode: "joint" | "pairwise"): Promise<void> {
    const envelope = this.state.envelope;
    if (!envelope) return;
    try {
      const report = await this.api.audit(envelope.session.id, "transitivity", { mode });
      this.emit({ auditReport: report, toast: null });
    } catch (err) {
      this.fail(err);
    }
  }

  async runFrameShift(offset: number, useProfile = false): Promise<void> {
    const envelope = this.state.envelope;
    if (!envelope) return;
    try {
      const report = await this.api.audit(envelope.session.id, "invariance", {
        offset,
        use_profile: useProfile,
      });
      this.emit({ frameShift: { offset, report }, toast: null });
    } catch (err) {
      this.fail(err);
    }
  }

  dismissToast(): void {
    this.emit({ toast: null });
  }
}
