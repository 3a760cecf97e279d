// Wiring: socket -> view model -> canvas, input loop -> socket.

import { setupConditionPanel, describe } from "./conditions.js";
import { InputLoop } from "./input.js";
import { connect } from "./net.js";
import { parseConditionQuery } from "./protocol.js";
import { newSteerState, steerInput } from "./steer.js";
import { SceneView } from "./view.js";
import { ViewModel } from "./viewmodel.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const panel = document.getElementById("conditions") as HTMLElement;
const eventsEl = document.getElementById("events") as HTMLElement;

const vm = new ViewModel();
const view = new SceneView(canvas);
const initialCondition = parseConditionQuery(window.location.search);
const steerState = newSteerState();

const connection = connect(
  `ws://${window.location.host}/session`,
  (message) => {
    if (message.kind === "snapshot") {
      vm.onSnapshot(message.snapshot);
      if (vm.autopilot) {
        const command = steerInput(message.snapshot, steerState);
        if (command) {
          connection.send(command);
        }
      }
    } else if (message.kind === "task_event") {
      vm.pushEvent(
        message.event === "complete"
          ? `task complete at t=${message.t.toFixed(2)}s`
          : `snapped ${message.id} at t=${message.t.toFixed(2)}s`,
      );
    } else if (message.kind === "error") {
      vm.pushEvent(`server error: ${message.message}`);
    }
  },
  (live) => {
    if (live) {
      vm.status = "live";
      connection.send({ kind: "hello" });
      connection.send({ kind: "configure", condition: vm.condition });
      vm.pushEvent(`configured ${describe(vm.condition)}`);
    } else {
      vm.status = "closed";
    }
  },
);

setupConditionPanel(panel, connection, vm, initialCondition);

const input = new InputLoop(connection, vm, canvas);
input.start();

function frame(): void {
  view.render(vm);
  eventsEl.textContent = vm.events.join("\n");
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
