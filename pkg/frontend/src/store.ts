// Minimal observable value container; pages subscribe and re-render.

export type Unsubscribe = () => void;

export class Store<T> {
  private listeners = new Set<(value: T) => void>();

  constructor(private value: T) {}

  get(): T {
    return this.value;
  }

  set(value: T): void {
    this.value = value;
    for (const fn of [...this.listeners]) fn(value);
  }

  update(fn: (value: T) => T): void {
    this.set(fn(this.value));
  }

  subscribe(fn: (value: T) => void, fireNow = true): Unsubscribe {
    this.listeners.add(fn);
    if (fireNow) fn(this.value);
    return () => this.listeners.delete(fn);
  }
}

export interface SessionInfo {
  username: string;
  role: "administrator" | "operator";
  token: string;
}

export interface PlatformInfo {
  features: string[];
  sensor_graphs: SensorGraphSpec[];
  video_streams: { name: string; topic: string; fps: number }[];
  panel_fields: { id: string; display_name?: string; default?: unknown }[];
  modules: { name: string; launch_units: string[]; allowed_roles: string[] }[];
  groups: string[];
  database_whitelist: string[];
}

export interface SensorGraphSpec {
  name: string;
  id: string;
  title: string;
  kind: "scatter" | "time_evolution";
  topic: string;
  rate_hz: number;
  labels: string[];
  axes: { x_min?: number; x_max?: number; y_min?: number; y_max?: number };
  points: number;
}

export type OperationMode = "idle" | "running" | "alarm" | "programming" | "unknown";
