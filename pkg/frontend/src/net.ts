// Thin websocket wrapper for the browser side.

import { ClientMessage, ServerMessage } from "./protocol.js";

export interface Connection {
  send(message: ClientMessage): void;
  close(): void;
}

export function connect(
  url: string,
  onMessage: (message: ServerMessage) => void,
  onStatus: (live: boolean) => void,
): Connection {
  const ws = new WebSocket(url);
  ws.onopen = () => onStatus(true);
  ws.onclose = () => onStatus(false);
  ws.onerror = () => onStatus(false);
  ws.onmessage = (event) => {
    try {
      onMessage(JSON.parse(event.data as string) as ServerMessage);
    } catch {
      // a malformed server frame is a bug, but never kill the render loop
    }
  };
  return {
    send(message: ClientMessage) {
      if (ws.readyState === WebSocket.OPEN) {
        ws.send(JSON.stringify(message));
      }
    },
    close() {
      ws.close();
    },
  };
}
