// Wire types for the session service. Field names and shapes mirror the
// server's JSON exactly; nothing here is simulated client-side.

export type Vec = [number, number, number];

export interface Condition {
  concentration: boolean;
  strain: boolean;
  energy: boolean;
}

export interface GateState {
  gaze: boolean;
  palm: boolean;
  open: boolean;
  concentration: boolean;
  strain: boolean;
  active: boolean;
}

export interface ObjectView {
  id: string;
  pos: Vec;
  snapped: boolean;
}

export interface Snapshot {
  t: number;
  hand: { pos: Vec; openness: number };
  gate: GateState;
  selected: string | null;
  objects: ObjectView[];
  detectors: { fprime: number; blink_mean: number | null; concentrated: boolean };
  thermal: Record<string, { temp: number; heater: boolean }>;
  task: {
    stacked: string[];
    next: string | null;
    next_goal: Vec | null;
    complete: boolean;
    elapsed: number;
  };
}

export type ServerMessage =
  | { kind: "snapshot"; snapshot: Snapshot }
  | { kind: "task_event"; event: "snap" | "complete"; id: string | null; t: number }
  | { kind: "error"; message: string };

export interface InputMessage {
  kind: "input";
  hand_delta?: Vec;
  openness?: number;
  strain_level?: number;
  gaze_point?: Vec;
  blink?: boolean;
}

export type ClientMessage =
  | { kind: "hello" }
  | { kind: "configure"; condition: Condition; config?: Record<string, number>; snapshot_rate?: number }
  | InputMessage
  | { kind: "reset" };

export function parseConditionQuery(query: string): Condition {
  const params = new URLSearchParams(query);
  const yes = (key: string, alias: string) =>
    (params.get(key) ?? params.get(alias)) === "yes";
  return {
    concentration: yes("c", "concentration"),
    strain: yes("s", "strain"),
    energy: yes("e", "energy"),
  };
}
