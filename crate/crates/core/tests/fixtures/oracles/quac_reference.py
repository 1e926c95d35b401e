"""Per-question QuAC scores, HEQ and dialog HEQ, following the official
scorer: CANNOTANSWER majority handling, leave-one-out human and model F1,
and the 0.4 human-agreement filter."""
import json
import re
import string
import sys
from collections import Counter, defaultdict

MIN_F1 = 0.4


def normalize_answer(s):
    def remove_articles(text):
        return re.sub(r"\b(a|an|the)\b", " ", text)

    def white_space_fix(text):
        return " ".join(text.split())

    def remove_punc(text):
        exclude = set(string.punctuation)
        return "".join(ch for ch in text if ch not in exclude)

    return white_space_fix(remove_articles(remove_punc(s.lower())))


def f1_score(prediction, ground_truth):
    prediction_tokens = normalize_answer(prediction).split()
    ground_truth_tokens = normalize_answer(ground_truth).split()
    common = Counter(prediction_tokens) & Counter(ground_truth_tokens)
    num_same = sum(common.values())
    if num_same == 0:
        return 0
    precision = 1.0 * num_same / len(prediction_tokens)
    recall = 1.0 * num_same / len(ground_truth_tokens)
    return (2 * precision * recall) / (precision + recall)


def compute_span_overlap(pred_span, gt_span):
    if gt_span == "CANNOTANSWER":
        return 1.0 if pred_span == "CANNOTANSWER" else 0.0
    return f1_score(pred_span, gt_span)


def metric_max(prediction, ground_truths):
    return max(compute_span_overlap(prediction, g) for g in ground_truths)


def leave_one_out_max(prediction, ground_truths):
    if len(ground_truths) == 1:
        return metric_max(prediction, ground_truths)
    t_f1 = []
    for i in range(len(ground_truths)):
        idxes = list(range(len(ground_truths)))
        idxes.pop(i)
        t_f1.append(metric_max(prediction, [ground_truths[z] for z in idxes]))
    return 1.0 * sum(t_f1) / len(t_f1)


def handle_cannot(refs):
    num_cannot = sum(1 for r in refs if r == "CANNOTANSWER")
    num_spans = len(refs) - num_cannot
    if num_cannot >= num_spans:
        return ["CANNOTANSWER"]
    return [x for x in refs if x != "CANNOTANSWER"]


def leave_one_out(refs):
    # Drops each reference by position, so repeated answers still count.
    if len(refs) == 1:
        return 1.0
    t_f1 = 0.0
    for i in range(len(refs)):
        m_f1 = 0
        for j, z in enumerate(refs):
            if j != i:
                m_f1 = max(m_f1, f1_score(refs[i], z))
        t_f1 += m_f1
    return t_f1 / len(refs)


def main(gold_path, pred_path):
    preds = defaultdict(dict)
    for line in open(pred_path):
        if line.strip():
            p = json.loads(line)
            did = p["qid"][0].split("_q#")[0]
            for qid, span, yesno, followup in zip(p["qid"], p["best_span_str"], p["yesno"], p["followup"]):
                preds[did][qid] = span, yesno, followup

    per_question = {}
    f1s, unfiltered, yes_nos = [], [], []
    heq = dheq = total_qs = total_dials = 0.0
    for record in json.load(open(gold_path))["data"]:
        for par in record["paragraphs"]:
            did = par["id"]
            good_dial = 1.0
            for qa in par["qas"]:
                qid = qa["id"]
                spans = handle_cannot([a["text"] for a in qa["answers"]])
                hf1 = leave_one_out(spans)
                if qid not in preds[did]:
                    good_dial = 0
                    f1s.append(0.0)
                    yes_nos.append(False)
                    unfiltered.append(0.0)
                    total_qs += 1
                    continue
                span, yesno, _ = preds[did][qid]
                max_f1 = leave_one_out_max(span, spans)
                unfiltered.append(max_f1)
                per_question[qid] = {"f1": max_f1, "human_f1": hf1, "excluded": hf1 < MIN_F1}
                if hf1 < MIN_F1:
                    continue
                yes_nos.append(yesno == qa["yesno"])
                if max_f1 >= hf1:
                    heq += 1.0
                else:
                    good_dial = 0.0
                f1s.append(max_f1)
                total_qs += 1
            dheq += good_dial
            total_dials += 1

    json.dump(
        {
            "scorer": "QuAC official scorer logic",
            "per_question": per_question,
            "f1": 100.0 * sum(f1s) / len(f1s),
            "unfiltered_f1": 100.0 * sum(unfiltered) / len(unfiltered),
            "HEQ": 100.0 * heq / total_qs,
            "DHEQ": 100.0 * dheq / total_dials,
            "yes/no": 100.0 * sum(yes_nos) / len(yes_nos),
        },
        sys.stdout,
        indent=1,
        sort_keys=True,
    )
    print()


if __name__ == "__main__":
    main(*sys.argv[1:])
