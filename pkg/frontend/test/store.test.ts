import { describe, expect, test } from "vitest";

import { Api } from "../src/api.js";
import { renderProblem, renderRanking } from "../src/render.js";
import { Store } from "../src/state.js";
import { FakeServer } from "./fakeServer.js";
import { F1_PROBLEM } from "./payloads.js";

function makeStore(): { server: FakeServer; store: Store } {
  const server = new FakeServer();
  const store = new Store(new Api(server.fetch));
  return { server, store };
}

const settle = (): Promise<void> => new Promise((open) => setTimeout(open, 0));

function recommended(store: Store): string {
  const envelope = store.current.envelope;
  expect(envelope).not.toBeNull();
  return envelope!.evaluation.ranking.recommended;
}

describe("marking walkthrough", () => {
  test("toggling marks moves the recommendation badge and back again", async () => {
    const { store } = makeStore();
    await store.openProblem(F1_PROBLEM);
    expect(recommended(store)).toBe("A");

    // Marking A's zero-outcome drops A to 2600 but the badge moves to B.
    await store.toggleMark("A", 1, true);
    expect(recommended(store)).toBe("B");
    expect(renderProblem(store.current.envelope!)).toContain(
      'data-ceu-for="A">2600.000<',
    );
    const beforeDetour =
      renderProblem(store.current.envelope!) + renderRanking(store.current.envelope!);

    // Marking B's only outcome sends B to -200: the badge flips to A.
    await store.toggleMark("B", 0, true);
    expect(recommended(store)).toBe("A");
    expect(renderRanking(store.current.envelope!)).toContain('data-recommended="A"');
    expect(renderProblem(store.current.envelope!)).toContain(
      'data-ceu-for="B">-200.000<',
    );

    // Untoggling is an involution: the rendered view returns exactly.
    await store.toggleMark("B", 0, false);
    expect(recommended(store)).toBe("B");
    const afterDetour =
      renderProblem(store.current.envelope!) + renderRanking(store.current.envelope!);
    expect(afterDetour).toBe(beforeDetour);
  });

  test("a fixture session opens marked and the same loop flips its badge", async () => {
    const { store } = makeStore();
    await store.openFixture("F1", 0);
    expect(store.current.envelope!.session.fixture).toBe("F1");
    expect(recommended(store)).toBe("B");

    await store.toggleMark("B", 0, true);
    expect(recommended(store)).toBe("A");

    await store.toggleMark("B", 0, false);
    expect(recommended(store)).toBe("B");
  });
});

describe("frame shift", () => {
  test("the shipped offset leaves the F5 ranking aligned and the light green", async () => {
    const { store } = makeStore();
    await store.openFixture("F5", 0);
    expect(recommended(store)).toBe("A");

    await store.runFrameShift(-600);
    const shift = store.current.frameShift;
    expect(shift).not.toBeNull();
    expect(shift!.offset).toBe(-600);
    expect(shift!.report.verdict).toBe("holds-on-input");

    const { renderFrameShift } = await import("../src/render.js");
    const html = renderFrameShift(shift);
    expect(html).toContain('data-agreement="green"');
    expect(html).toContain("-666.667");
  });
});

describe("audits", () => {
  test("a transitivity run lands in the audit drawer state", async () => {
    const { store } = makeStore();
    await store.openProblem(F1_PROBLEM);
    await store.runTransitivity("joint");
    expect(store.current.auditReport).not.toBeNull();
    expect(store.current.auditReport!.axiom).toBe("transitivity");
    expect(store.current.auditReport!.verdict).toBe("holds-on-input");
  });
});

describe("fixture browser", () => {
  test("lists exactly what the service reports", async () => {
    const { store } = makeStore();
    await store.loadFixtures();
    expect(store.current.fixtures.map((f) => f.id)).toEqual([
      "F1",
      "F2",
      "F3",
      "F4",
      "F5",
      "F6",
      "F7",
    ]);
  });
});

describe("mutation queue", () => {
  test("keeps at most one request in flight and preserves order", async () => {
    const { server, store } = makeStore();
    await store.openProblem(F1_PROBLEM);
    server.gated = true;

    const first = store.toggleMark("A", 1, true);
    const second = store.toggleMark("B", 0, true);
    await settle();

    const puts = () => server.log.filter((line) => line.startsWith("PUT"));
    expect(puts()).toEqual(["PUT /v1/sessions/S1/marks/A/1"]);
    expect(store.pendingMutations).toBe(2);
    expect(store.current.busy).toBe(true);

    server.release();
    await first;
    await settle();
    expect(puts()).toEqual([
      "PUT /v1/sessions/S1/marks/A/1",
      "PUT /v1/sessions/S1/marks/B/0",
    ]);

    server.release();
    await second;
    expect(recommended(store)).toBe("A");
    expect(store.pendingMutations).toBe(0);
    expect(store.current.busy).toBe(false);
  });

  test("a failed mutation leaves the envelope untouched and raises a toast", async () => {
    const { server, store } = makeStore();
    await store.openProblem(F1_PROBLEM);
    const before = store.current.envelope;

    server.failNextMark = "marking rejected";
    await store.toggleMark("A", 1, true);

    expect(store.current.toast).toBe("marking rejected");
    expect(store.current.envelope).toBe(before);
    expect(renderProblem(store.current.envelope!)).not.toContain(" checked ");

    store.dismissToast();
    expect(store.current.toast).toBeNull();
  });

  test("editing an outcome re-applies the current marks in one queued task", async () => {
    const { server, store } = makeStore();
    await store.openProblem(F1_PROBLEM);
    await store.toggleMark("A", 1, true);

    server.log.length = 0;
    await store.editOutcome("A", 0, { value: 4000 });

    expect(server.log).toEqual([
      "POST /v1/sessions",
      "PUT /v1/sessions/S1/marks/A/1",
    ]);
    expect(server.lastSessionBody).toEqual(F1_PROBLEM);
    expect(store.current.envelope!.session.marking).toEqual({
      A: [false, true],
      B: [false],
    });
    expect(recommended(store)).toBe("B");
  });
});
