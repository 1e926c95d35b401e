"""Per-question SQuAD 2.0 scores from transformers' copy of the official metric code."""
import json
import sys

from transformers.data.metrics.squad_metrics import compute_exact, compute_f1, normalize_answer


def main(gold_path, pred_path, cases_path):
    gold = json.load(open(gold_path))
    preds = json.load(open(pred_path))
    per_question = {}
    for article in gold["data"]:
        for p in article["paragraphs"]:
            for qa in p["qas"]:
                qid = qa["id"]
                answers = [a["text"] for a in qa["answers"] if normalize_answer(a["text"])]
                if not answers:
                    answers = [""]
                if qid not in preds:
                    continue
                per_question[qid] = {
                    "em": max(compute_exact(a, preds[qid]) for a in answers),
                    "f1": max(compute_f1(a, preds[qid]) for a in answers),
                }
    cases = [[p, g, compute_f1(g, p)] for p, g in json.load(open(cases_path))]
    n = len(per_question)
    json.dump(
        {
            "scorer": "transformers.data.metrics.squad_metrics",
            "exact": 100.0 * sum(v["em"] for v in per_question.values()) / n,
            "f1": 100.0 * sum(v["f1"] for v in per_question.values()) / n,
            "scored": n,
            "per_question": per_question,
            "token_f1": cases,
        },
        sys.stdout,
        indent=1,
        sort_keys=True,
        ensure_ascii=False,
    )
    print()


if __name__ == "__main__":
    main(*sys.argv[1:])
