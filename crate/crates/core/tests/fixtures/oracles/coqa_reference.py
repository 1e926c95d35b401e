"""Per-turn and per-domain CoQA scores, following the official evaluator's
leave-one-out averaging and domain grouping."""
import collections
import json
import re
import string
import sys

in_domain = ["mctest", "gutenberg", "race", "cnn", "wikipedia"]
out_domain = ["reddit", "science"]


def normalize_answer(s):
    def remove_articles(text):
        return re.sub(re.compile(r"\b(a|an|the)\b", re.UNICODE), " ", text)

    def white_space_fix(text):
        return " ".join(text.split())

    def remove_punc(text):
        exclude = set(string.punctuation)
        return "".join(ch for ch in text if ch not in exclude)

    return white_space_fix(remove_articles(remove_punc(s.lower())))


def get_tokens(s):
    if not s:
        return []
    return normalize_answer(s).split()


def compute_exact(a_gold, a_pred):
    return int(normalize_answer(a_gold) == normalize_answer(a_pred))


def compute_f1(a_gold, a_pred):
    gold_toks = get_tokens(a_gold)
    pred_toks = get_tokens(a_pred)
    common = collections.Counter(gold_toks) & collections.Counter(pred_toks)
    num_same = sum(common.values())
    if len(gold_toks) == 0 or len(pred_toks) == 0:
        return int(gold_toks == pred_toks)
    if num_same == 0:
        return 0
    precision = 1.0 * num_same / len(pred_toks)
    recall = 1.0 * num_same / len(gold_toks)
    return (2 * precision * recall) / (precision + recall)


def compute_turn_score(a_gold_list, a_pred):
    f1_sum = 0.0
    em_sum = 0.0
    if len(a_gold_list) > 1:
        for i in range(len(a_gold_list)):
            gold_answers = a_gold_list[0:i] + a_gold_list[i + 1:]
            em_sum += max(compute_exact(a, a_pred) for a in gold_answers)
            f1_sum += max(compute_f1(a, a_pred) for a in gold_answers)
    else:
        em_sum += max(compute_exact(a, a_pred) for a in a_gold_list)
        f1_sum += max(compute_f1(a, a_pred) for a in a_gold_list)
    return {"em": em_sum / max(1, len(a_gold_list)), "f1": f1_sum / max(1, len(a_gold_list))}


def main(gold_path, pred_path):
    dataset = json.load(open(gold_path))
    gold, source_of = {}, {}
    for story in dataset["data"]:
        source_of[story["id"]] = story["source"]
        multiple = [story["answers"]] + list(story["additional_answers"].values())
        for i, qa in enumerate(story["questions"]):
            gold[(story["id"], qa["turn_id"])] = [answers[i]["input_text"] for answers in multiple]
    preds = {(p["id"], p["turn_id"]): p["answer"] for p in json.load(open(pred_path))}

    per_turn = {}
    for key, golds in gold.items():
        if key in preds:
            per_turn[key] = compute_turn_score(golds, preds[key])

    sources = {s: collections.Counter() for s in in_domain + out_domain}
    for key in gold:
        s = sources[source_of[key[0]]]
        s["em_total"] += per_turn.get(key, {}).get("em", 0)
        s["f1_total"] += per_turn.get(key, {}).get("f1", 0)
        s["turn_count"] += 1

    def group(names):
        em = sum(sources[n]["em_total"] for n in names)
        f1 = sum(sources[n]["f1_total"] for n in names)
        turns = sum(sources[n]["turn_count"] for n in names)
        return {"em": em / max(1, turns) * 100, "f1": f1 / max(1, turns) * 100, "turns": turns}

    json.dump(
        {
            "scorer": "CoQA official evaluator logic",
            "per_question": {f"{k[0]}#{k[1]}": v for k, v in per_turn.items()},
            "per_domain": {s: group([s]) for s in in_domain + out_domain if sources[s]["turn_count"]},
            "in_domain": group(in_domain),
            "out_domain": group(out_domain),
            "overall": group(in_domain + out_domain),
        },
        sys.stdout,
        indent=1,
        sort_keys=True,
    )
    print()


if __name__ == "__main__":
    main(*sys.argv[1:])
