/**
 * Single-page questionnaire: ten Likert items plus demographics, a live
 * provisional score, and a result view fed by the prediction service.
 * No state leaves the page except the submitted payload.
 */

import { ApiError, health, modelCard, predict, type PredictResponse } from "./api.js";
import {
  emptyForm,
  isComplete,
  itemsComplete,
  provisionalScore,
  toPayload,
  type FormState,
  type YesNo,
} from "./form.js";
import { LIKERT_ANSWERS, SCORE_THRESHOLD, type LikertAnswer } from "./scoring.js";

/** The ten item texts, reproduced verbatim from the standard checklist. */
export const QUESTIONS: readonly string[] = [
  "Does your child look at you when you call his/her name?",
  "How easy is it for you to get eye contact with your child?",
  "Does your child point to indicate that s/he wants something?",
  "Does your child point to share interest with you?",
  "Does your child pretend?",
  "Does your child follow where you are looking?",
  "does your child show signs of wanting to comfot someone upset?",
  "Description of child first words",
  "Does your child use simple gestures?",
  "Does your child stare at nothing with no apparent purpose?",
];

const ETHNICITY_SUGGESTIONS = [
  "White European", "Asian", "Middle Eastern", "South Asian", "Black",
  "Hispanic", "Latino", "Mixed", "Native Indian", "Pacifica", "Others",
];

const RESPONDENT_SUGGESTIONS = [
  "Parent", "Self", "Caregiver", "Medical Staff", "Clinician",
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

export function createApp(root: HTMLElement): void {
  const form = emptyForm();
  let submitSeq = 0;

  root.textContent = "";
  root.append(
    el("h1", {}, "Toddler screening questionnaire"),
    el(
      "p",
      { class: "disclaimer" },
      "This is a screening aid, not a diagnosis. A flagged result means a " +
        "formal assessment by a clinician is worth pursuing; only that " +
        "assessment can diagnose.",
    ),
  );

  const statusLine = el("p", { id: "service-status" }, "checking service...");
  root.append(statusLine);

  const formEl = el("form", { id: "questionnaire" });
  formEl.addEventListener("submit", (event) => event.preventDefault());

  QUESTIONS.forEach((question, index) => {
    const itemNumber = index + 1;
    const fieldset = el("fieldset", { id: `item-${itemNumber}` });
    fieldset.append(el("legend", {}, `${itemNumber}. ${question}`));
    for (const answer of LIKERT_ANSWERS) {
      const label = el("label", { class: "answer" });
      const input = el("input", {
        type: "radio",
        name: `a${itemNumber}`,
        value: answer,
      }) as HTMLInputElement;
      input.addEventListener("change", () => {
        form.items[index] = answer as LikertAnswer;
        refresh();
      });
      label.append(input, document.createTextNode(` ${answer}`));
      fieldset.append(label);
    }
    formEl.append(fieldset);
  });

  const demographics = el("fieldset", { id: "demographics" });
  demographics.append(el("legend", {}, "About the child"));

  const ageInput = el("input", {
    type: "number",
    id: "age-months",
    min: "1",
    step: "1",
    inputmode: "numeric",
  }) as HTMLInputElement;
  ageInput.addEventListener("input", () => {
    form.ageMonths = ageInput.value;
    refresh();
  });
  demographics.append(labeled("Age in months", ageInput));

  const sexSelect = choiceSelect("sex", ["", "Male", "Female"]);
  sexSelect.addEventListener("change", () => {
    form.sex = sexSelect.value as FormState["sex"];
    refresh();
  });
  demographics.append(labeled("Sex", sexSelect));

  const ethnicityInput = el("input", {
    type: "text",
    id: "ethnicity",
    list: "ethnicity-options",
  }) as HTMLInputElement;
  const ethnicityList = el("datalist", { id: "ethnicity-options" });
  for (const option of ETHNICITY_SUGGESTIONS) {
    ethnicityList.append(el("option", { value: option }));
  }
  ethnicityInput.addEventListener("input", () => {
    form.ethnicity = ethnicityInput.value;
    refresh();
  });
  demographics.append(labeled("Ethnicity", ethnicityInput), ethnicityList);

  const jaundiceSelect = yesNoSelect("jaundice");
  jaundiceSelect.addEventListener("change", () => {
    form.jaundice = jaundiceSelect.value as "" | YesNo;
    refresh();
  });
  demographics.append(labeled("Born with jaundice", jaundiceSelect));

  const familySelect = yesNoSelect("family-asd");
  familySelect.addEventListener("change", () => {
    form.familyAsd = familySelect.value as "" | YesNo;
    refresh();
  });
  demographics.append(labeled("Immediate family member with ASD", familySelect));

  const respondentInput = el("input", {
    type: "text",
    id: "respondent",
    list: "respondent-options",
  }) as HTMLInputElement;
  const respondentList = el("datalist", { id: "respondent-options" });
  for (const option of RESPONDENT_SUGGESTIONS) {
    respondentList.append(el("option", { value: option }));
  }
  respondentInput.addEventListener("input", () => {
    form.respondent = respondentInput.value;
    refresh();
  });
  demographics.append(labeled("Who is completing the test", respondentInput), respondentList);

  formEl.append(demographics);

  const scoreLine = el("p", { id: "live-score", hidden: "" });
  const submitButton = el("button", { id: "submit", type: "submit" }, "Get screening result") as HTMLButtonElement;
  submitButton.disabled = true;
  submitButton.addEventListener("click", () => void submit());
  formEl.append(scoreLine, submitButton);
  root.append(formEl);

  const resultView = el("section", { id: "result", hidden: "" });
  const errorView = el("section", { id: "error", hidden: "" });
  root.append(resultView, errorView);

  function labeled(text: string, control: HTMLElement): HTMLLabelElement {
    const label = el("label", { class: "field" });
    label.append(el("span", {}, `${text} `), control);
    return label;
  }

  function choiceSelect(id: string, values: string[]): HTMLSelectElement {
    const select = el("select", { id }) as HTMLSelectElement;
    for (const value of values) {
      select.append(el("option", { value }, value === "" ? "choose..." : value));
    }
    return select;
  }

  function yesNoSelect(id: string): HTMLSelectElement {
    const select = el("select", { id }) as HTMLSelectElement;
    select.append(
      el("option", { value: "" }, "choose..."),
      el("option", { value: "yes" }, "Yes"),
      el("option", { value: "no" }, "No"),
    );
    return select;
  }

  function refresh(): void {
    const score = provisionalScore(form);
    if (score === null) {
      scoreLine.hidden = true;
    } else {
      scoreLine.hidden = false;
      const provisional = itemsComplete(form) ? "Score" : "Provisional score";
      scoreLine.textContent = `${provisional}: ${score} of 10`;
    }
    submitButton.disabled = !isComplete(form);
  }

  function renderResult(result: PredictResponse): void {
    errorView.hidden = true;
    resultView.hidden = false;
    resultView.textContent = "";
    const flagged = result.qchat_label === "Yes";
    resultView.append(
      el("h2", {}, flagged ? "ASD traits flagged" : "No ASD traits flagged"),
      el(
        "p",
        { id: "result-score" },
        `Questionnaire score: ${result.qchat_score} of 10. Scores above ` +
          `${SCORE_THRESHOLD} flag ASD traits; ${SCORE_THRESHOLD} or below do not.`,
      ),
      el(
        "p",
        { id: "result-model" },
        `Model (${result.model_kind}) classification: ${result.label} ` +
          `(score ${result.score.toFixed(3)})`,
      ),
    );
    if (result.rule_model_disagree) {
      resultView.append(
        el(
          "p",
          { class: "note" },
          "Note: the model disagrees with the questionnaire rule here; " +
            "treat the flagged outcome as the cautious reading.",
        ),
      );
    }
    for (const warning of result.warnings) {
      resultView.append(el("p", { class: "warning" }, `Warning: ${warning}`));
    }
    resultView.append(
      el(
        "p",
        { class: "disclaimer" },
        "Screening, not diagnosis: discuss this result with a clinician.",
      ),
    );
  }

  function renderError(message: string, issues: { field: string; message: string }[]): void {
    resultView.hidden = true;
    errorView.hidden = false;
    errorView.textContent = "";
    errorView.append(el("h2", {}, "Could not get a result"), el("p", {}, message));
    if (issues.length > 0) {
      const list = el("ul");
      for (const issue of issues) {
        list.append(el("li", {}, `${issue.field}: ${issue.message}`));
      }
      errorView.append(list);
    }
    const retry = el("button", { type: "button" }, "Retry");
    retry.addEventListener("click", () => void submit());
    errorView.append(retry);
  }

  async function submit(): Promise<void> {
    if (!isComplete(form)) return;
    const seq = ++submitSeq;
    submitButton.disabled = true;
    try {
      const result = await predict(toPayload(form));
      if (seq !== submitSeq) return;
      renderResult(result);
    } catch (err) {
      if (seq !== submitSeq) return;
      if (err instanceof ApiError) {
        renderError(`The service rejected the submission (HTTP ${err.status}).`, err.issues);
      } else {
        renderError("The service could not be reached. Is it running?", []);
      }
    } finally {
      if (seq === submitSeq) submitButton.disabled = !isComplete(form);
    }
  }

  void (async () => {
    try {
      await health();
      const card = await modelCard();
      statusLine.textContent = `service ready - model ${card.model_kind} (${card.model_id})`;
    } catch {
      statusLine.textContent =
        "service unavailable - start it with: screenlab serve --model-file <model.json>";
    }
  })();
}

const rootElement = document.getElementById("app");
if (rootElement !== null) {
  createApp(rootElement);
}
