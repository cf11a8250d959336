// Session creation form. Validates client-side before any request is sent
// and surfaces server-side 422 field errors inline.

import { AdvisorClient, ApiError, SessionConfigInput, SessionSnapshot } from "./api.js";

interface FieldSpec {
  name: keyof SessionConfigInput;
  label: string;
  value: number;
  validate: (v: number) => string | null;
}

const FIELDS: FieldSpec[] = [
  {
    name: "budget",
    label: "Budget",
    value: 5000,
    validate: (v) => (v > 0 ? null : "budget must be positive"),
  },
  {
    name: "alpha_c",
    label: "Cost per class label",
    value: 1,
    validate: (v) => (v > 0 ? null : "cost must be positive"),
  },
  {
    name: "alpha_s",
    label: "Cost per segmentation mask",
    value: 12,
    validate: (v) => (v > 0 ? null : "cost must be positive"),
  },
  {
    name: "total_steps",
    label: "Installments",
    value: 8,
    validate: (v) => (Number.isInteger(v) && v >= 1 ? null : "needs a whole number ≥ 1"),
  },
  {
    name: "initial_c",
    label: "Initial class labels",
    value: 200,
    validate: (v) => (Number.isInteger(v) && v >= 0 ? null : "needs a whole number ≥ 0"),
  },
  {
    name: "initial_s",
    label: "Initial segmentation masks",
    value: 16,
    validate: (v) => (Number.isInteger(v) && v >= 0 ? null : "needs a whole number ≥ 0"),
  },
  {
    name: "m_count",
    label: "Evaluation subsets per installment",
    value: 20,
    validate: (v) => (Number.isInteger(v) && v >= 1 ? null : "needs a whole number ≥ 1"),
  },
  {
    name: "seed",
    label: "Seed",
    value: 0,
    validate: (v) => (Number.isInteger(v) ? null : "needs a whole number"),
  },
];

export function renderWizard(
  container: HTMLElement,
  client: AdvisorClient,
  onCreated: (snapshot: SessionSnapshot) => void,
): HTMLFormElement {
  const form = document.createElement("form");
  form.className = "wizard";
  form.noValidate = true;

  const banner = document.createElement("div");
  banner.className = "banner hidden";
  form.appendChild(banner);

  for (const field of FIELDS) {
    const row = document.createElement("label");
    row.className = "field";
    row.textContent = field.label;
    const input = document.createElement("input");
    input.type = "number";
    input.step = "any";
    input.name = field.name;
    input.value = String(field.value);
    const error = document.createElement("span");
    error.className = "field-error";
    error.dataset.for = field.name;
    row.appendChild(input);
    row.appendChild(error);
    form.appendChild(row);
  }

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Start campaign";
  form.appendChild(submit);

  const setFieldError = (name: string, message: string) => {
    const slot = form.querySelector<HTMLElement>(`.field-error[data-for="${name}"]`);
    if (slot) slot.textContent = message;
  };

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    banner.classList.add("hidden");
    form.querySelectorAll(".field-error").forEach((el) => (el.textContent = ""));

    const config: Partial<Record<keyof SessionConfigInput, number>> = {};
    let valid = true;
    for (const field of FIELDS) {
      const input = form.querySelector<HTMLInputElement>(`input[name="${field.name}"]`);
      const value = Number(input?.value);
      const problem = Number.isFinite(value) ? field.validate(value) : "needs a number";
      if (problem) {
        setFieldError(field.name, problem);
        valid = false;
      } else {
        config[field.name] = value;
      }
    }
    if (!valid) return;

    submit.disabled = true;
    client
      .createSession(config as unknown as SessionConfigInput)
      .then(onCreated)
      .catch((err) => {
        if (err instanceof ApiError && err.field) {
          setFieldError(err.field, err.message);
        } else {
          banner.textContent = `Could not reach the advisor service — retry. (${
            err instanceof Error ? err.message : String(err)
          })`;
          banner.classList.remove("hidden");
        }
      })
      .finally(() => {
        submit.disabled = false;
      });
  });

  container.appendChild(form);
  return form;
}
