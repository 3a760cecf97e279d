// Factor-condition panel: three checkboxes; any change resets the session
// under the new condition. The URL query can preload a condition, e.g.
// ?c=yes&s=no&e=yes

import { Connection } from "./net.js";
import { Condition } from "./protocol.js";
import { ViewModel } from "./viewmodel.js";

export function setupConditionPanel(
  root: HTMLElement,
  connection: Connection,
  vm: ViewModel,
  initial: Condition,
): void {
  vm.condition = { ...initial };
  const factors: Array<[keyof Condition, string]> = [
    ["concentration", "concentration"],
    ["strain", "strain"],
    ["energy", "energy"],
  ];
  for (const [key, label] of factors) {
    const wrap = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = vm.condition[key];
    box.addEventListener("change", () => {
      vm.condition = { ...vm.condition, [key]: box.checked };
      connection.send({ kind: "reset" });
      connection.send({ kind: "configure", condition: vm.condition });
      vm.pushEvent(`condition -> ${describe(vm.condition)} (task reset)`);
    });
    wrap.appendChild(box);
    wrap.appendChild(document.createTextNode(" " + label));
    root.appendChild(wrap);
  }
}

export function describe(condition: Condition): string {
  const yn = (b: boolean) => (b ? "yes" : "no");
  return `c=${yn(condition.concentration)},s=${yn(condition.strain)},e=${yn(condition.energy)}`;
}
