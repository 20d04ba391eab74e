// Instance catalog browser: filter controls on top, result table below.

import * as api from "../api.js";
import { beginRequest, clear, el, withBusy } from "../dom.js";
import { toastError } from "../toast.js";
import { MARKETS, PROVIDERS } from "../types.js";
import type { InstanceTypeDoc, Market, Provider } from "../types.js";

function checkboxGroup(
  legend: string,
  name: string,
  options: readonly string[],
): { fieldset: HTMLFieldSetElement; checked: () => string[] } {
  const boxes: HTMLInputElement[] = [];
  const fieldset = el("fieldset", { class: "filter-group" }, el("legend", {}, legend));
  for (const option of options) {
    const box = el("input", {
      type: "checkbox",
      name,
      value: option,
      id: `${name}-${option}`,
    });
    boxes.push(box);
    fieldset.append(el("label", { class: "check-label", for: `${name}-${option}` }, box, option));
  }
  return { fieldset, checked: () => boxes.filter((b) => b.checked).map((b) => b.value) };
}

export function renderInstancesPage(outlet: HTMLElement): void {
  const providerGroup = checkboxGroup("Providers", "flt-provider", PROVIDERS);
  const marketGroup = checkboxGroup("Market spaces", "flt-market", MARKETS);
  const minCapacity = el("input", { type: "number", id: "flt-min-capacity", min: "0", step: "any" });
  const maxPrice = el("input", { type: "number", id: "flt-max-price", min: "0", step: "any" });
  const applyButton = el("button", { type: "submit", class: "btn btn-blue" }, "Apply filters");

  const filterForm = el("form", { class: "filter-bar", novalidate: true },
    providerGroup.fieldset,
    marketGroup.fieldset,
    el("div", { class: "filter-group" },
      el("label", { for: "flt-min-capacity" }, "Min capacity"),
      minCapacity,
    ),
    el("div", { class: "filter-group" },
      el("label", { for: "flt-max-price" }, "Max price per slot"),
      maxPrice,
    ),
    applyButton,
  );

  const tableHost = el("div", { class: "table-host", id: "instance-table" });

  const renderTable = (types: InstanceTypeDoc[]) => {
    clear(tableHost);
    if (types.length === 0) {
      tableHost.append(el("p", { class: "empty-note" }, "no instance types match the current filters"));
      return;
    }
    const body = el("tbody", {});
    for (const t of types) {
      body.append(el("tr", { "data-id": t.id },
        el("td", {}, t.provider),
        el("td", {}, t.name),
        el("td", {}, t.market),
        el("td", { class: "num" }, String(t.capacity)),
        el("td", { class: "num" }, t.price_per_slot.toString()),
      ));
    }
    tableHost.append(
      el("table", { class: "data-table" },
        el("thead", {},
          el("tr", {},
            el("th", {}, "Provider"),
            el("th", {}, "Name"),
            el("th", {}, "Market space"),
            el("th", { class: "num" }, "Capacity"),
            el("th", { class: "num" }, "Price / slot"),
          ),
        ),
        body,
      ),
      el("p", { class: "count-note" }, `${types.length} instance types`),
    );
  };

  const load = async () => {
    const stillCurrent = beginRequest("instances");
    const filter: {
      providers?: Provider[];
      markets?: Market[];
      min_capacity?: number;
      max_price?: number;
    } = {};
    const providers = providerGroup.checked() as Provider[];
    const markets = marketGroup.checked() as Market[];
    if (providers.length > 0) filter.providers = providers;
    if (markets.length > 0) filter.markets = markets;
    if (minCapacity.value.trim() !== "") filter.min_capacity = Number(minCapacity.value);
    if (maxPrice.value.trim() !== "") filter.max_price = Number(maxPrice.value);
    try {
      const types = await api.listInstances(filter);
      if (stillCurrent()) renderTable(types);
    } catch (err) {
      if (stillCurrent()) toastError(err, "could not load instance types");
    }
  };

  filterForm.addEventListener("submit", (event) => {
    event.preventDefault();
    void withBusy(applyButton, load);
  });

  outlet.append(
    el("section", { class: "page" },
      el("h2", {}, "Providers and instances"),
      filterForm,
      tableHost,
    ),
  );
  void load();
}
