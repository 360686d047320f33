/** Protocol client: sequence numbering, one in-flight mutating command,
 * response/push dispatch. Transport is injected so tests can fake it. */

import type { EventPayload, Response, ServerMessage } from "./types.js";

export interface Socket {
  send(text: string): void;
  close(): void;
  onmessage: ((text: string) => void) | null;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
}

/** Browser WebSocket adapted to the minimal Socket surface. */
export function browserSocket(url: string): Socket {
  const ws = new WebSocket(url);
  const wrapper: Socket = {
    send: (text) => ws.send(text),
    close: () => ws.close(),
    onmessage: null,
    onopen: null,
    onclose: null,
  };
  ws.onmessage = (ev) => wrapper.onmessage?.(String(ev.data));
  ws.onopen = () => wrapper.onopen?.();
  ws.onclose = () => wrapper.onclose?.();
  return wrapper;
}

const MUTATING = new Set(["start", "set_weights", "run_segment", "stop", "export_candidate"]);

interface Pending {
  resolve: (r: Response) => void;
  reject: (e: Error) => void;
  mutating: boolean;
}

export class ProtocolClient {
  private seq = 0;
  private pending = new Map<number, Pending>();
  private mutatingInFlight = false;
  private segmentRunning = false;
  sessionId: string | null = null;
  connected = false;
  onEvent: ((event: EventPayload) => void) | null = null;
  onConnectionChange: ((connected: boolean) => void) | null = null;

  constructor(private socket: Socket) {
    socket.onmessage = (text) => this.dispatch(JSON.parse(text) as ServerMessage);
    socket.onopen = () => {
      this.connected = true;
      this.onConnectionChange?.(true);
    };
    socket.onclose = () => {
      this.connected = false;
      this.onConnectionChange?.(false);
    };
  }

  /** True while a mutating command or a search segment is outstanding. */
  get busy(): boolean {
    return this.mutatingInFlight || this.segmentRunning;
  }

  private dispatch(msg: ServerMessage): void {
    if (msg.type === "event") {
      this.segmentRunning = false; // segment completion arrives as a push
      this.onEvent?.(msg.event);
      return;
    }
    const waiter = this.pending.get(msg.seq);
    if (!waiter) return;
    this.pending.delete(msg.seq);
    if (waiter.mutating) this.mutatingInFlight = false;
    if (msg.ok) {
      if (msg.cmd === "run_segment" && msg.running) this.segmentRunning = true;
      waiter.resolve(msg);
    } else {
      waiter.reject(new Error(msg.error ?? "command rejected"));
    }
  }

  send(type: string, body: Record<string, unknown> = {}): Promise<Response> {
    const mutating = MUTATING.has(type);
    if (mutating && this.busy) {
      return Promise.reject(new Error(`${type}: a command is already in flight`));
    }
    const seq = ++this.seq;
    const msg: Record<string, unknown> = { type, seq, ...body };
    if (this.sessionId !== null && !("session_id" in msg)) {
      msg.session_id = this.sessionId;
    }
    if (mutating) this.mutatingInFlight = true;
    return new Promise((resolve, reject) => {
      this.pending.set(seq, { resolve, reject, mutating });
      this.socket.send(JSON.stringify(msg));
    });
  }

  async listVersions(): Promise<Response> {
    return this.send("list_versions");
  }

  async start(config: Record<string, unknown>): Promise<Response> {
    const resp = await this.send("start", { config });
    this.sessionId = resp.session_id ?? null;
    return resp;
  }

  setWeights(weights: Record<string, number>): Promise<Response> {
    return this.send("set_weights", { weights });
  }

  runSegment(): Promise<Response> {
    return this.send("run_segment");
  }

  candidateDetail(cid: number): Promise<Response> {
    return this.send("candidate_detail", { cid });
  }

  exportCandidate(cid: number): Promise<Response> {
    return this.send("export_candidate", { cid });
  }

  status(): Promise<Response> {
    return this.send("status");
  }

  stop(): Promise<Response> {
    return this.send("stop");
  }
}
