/** Payload shapes served under /api/v1; the UI computes nothing the API
 * already provides, only layout. */

export interface MetricDesc {
  id: string;
  kind: "time" | "count";
  unit: string;
}

export interface SessionManifest {
  id: string;
  session_id: string;
  format_version: number;
  wall_start: number;
  command: string;
  hostname: string;
  metrics: MetricDesc[];
  duration_ns: number;
  thread_count: number;
  truncated: boolean;
  error_log: unknown[];
  check_report: CheckResult[] | null;
}

export interface CheckResult {
  check_id: string;
  status: "pass" | "fail" | "unknown";
  observed: string;
  expected: string;
  remedy: string;
}

export interface FrameRef {
  function: string;
  file: string | null;
  line: number | null;
  module: string | null;
}

export interface TreeNode {
  tid: number;
  pid: number;
  names: [number, string][];
  spawn_t: number;
  exit_t: number;
  implicit: boolean;
  open_ended: boolean;
  spawn_sid: number | null;
  spawn_stack: FrameRef[] | null;
  children: TreeNode[];
}

export interface Tree {
  roots: TreeNode[];
}

export interface Segment {
  start: number;
  end: number;
  state: "on" | "off";
  sid: number | null;
  synthetic: boolean;
}

export interface TimelineSegments {
  mode: "segments";
  tid: number;
  spawn_t: number;
  exit_t: number;
  segments: Segment[];
  counters: Record<string, number>;
}

export interface TimelineBucket {
  index: number;
  dominant: "on" | "off";
  on_ns: number;
  off_ns: number;
}

export interface TimelineBuckets {
  mode: "buckets";
  tid: number;
  spawn_t: number;
  exit_t: number;
  bucket_ns: number;
  buckets: TimelineBucket[];
  counters: Record<string, number>;
}

export type Timeline = TimelineSegments | TimelineBuckets;

/** Hot-and-cold trie node (walltime) or single-value node (counted metrics). */
export interface FlameNode {
  function: string;
  file: string | null;
  module: string | null;
  hot_ns?: number;
  cold_ns?: number;
  value?: number;
  lines: Record<string, number>;
  children: FlameNode[];
}

export interface ChronSpan {
  t_start: number;
  duration_ns: number;
  sid: number;
  channel: "hot" | "cold";
}

export interface Chron {
  tid: number;
  spans: ChronSpan[];
  stacks: Record<string, FrameRef[]>;
}

export interface SearchResponse {
  pattern: string;
  matches: { path: string[]; node: string }[];
  fractions: Record<string, number>;
}

export interface SpawnStack {
  tid: number;
  spawn_sid: number;
  frames: FrameRef[];
}

export interface LinesResponse {
  node: string;
  metric: string;
  function: string;
  file: string | null;
  lines: [number, number][];
}

export interface SourceResponse {
  file: string;
  line_count: number;
  lossy: boolean;
  lines: string[];
}

export interface Roofline {
  machine: string;
  compute: { name: string; ops_per_sec: number }[];
  memory: { name: string; bytes_per_sec: number }[];
}

export interface ApiErrorBody {
  error_code: string;
  message: string;
}
