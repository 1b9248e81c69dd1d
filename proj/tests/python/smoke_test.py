"""Smoke tests for the python bindings: a handful of known values per area."""

import math
import sys

import omnikit


def check(cond, what):
    if not cond:
        print(f"FAIL: {what}")
        sys.exit(1)
    print(f"ok: {what}")


def main():
    # tokenizer round trip and compression
    tok = omnikit.Tokenizer.train("abadabadabad abadabadabad", 280)
    ids = tok.encode("abad abad")
    check(tok.decode(ids) == b"abad abad", "tokenizer round trip")
    check(tok.vocab_size() == 256 + tok.merge_count() + 11, "vocab accounting")

    pure = omnikit.Tokenizer.train("xy", 256, [])
    report = omnikit.compression_rate(pure, [("ascii", "plain ascii text")])
    check(report["domains"]["ascii"]["rate"] == 1.0, "pure byte tokenizer rate 1.0")

    # corpus prep
    check(omnikit.normalize("Hello\t\tWorld ") == "hello world", "normalize")
    kept = omnikit.lsh_dedup(["same text body here okay", "same text body here okay", "other"],
                             k=32, bands=4, rows=8)
    check(len(kept) == 2, "lsh dedup merges exact duplicates")
    topo = omnikit.topo_sort(["A", "B"], [("A", "B")])
    check(topo["order"] == ["B", "A"], "topo sort puts imports first")

    # vision budgets
    check(omnikit.plan_slices(448, 448)["tokens"] == 64, "448x448 -> 64 tokens")
    check(omnikit.plan_slices(1024, 1024)["tokens"] == 320, "1024x1024 -> 320 tokens")
    check(omnikit.vision_token_budget(4000, 500) == 576, "4000x500 -> 576 tokens")

    # audio rate law
    check(omnikit.audio_token_count(480000) == 1500, "30 s -> 1500 tokens")
    check(omnikit.audio_token_count(16000) == 50, "1 s -> 50 tokens")
    mel = omnikit.mel_spectrogram([0.0] * 16000)
    check(len(mel) == 100 and len(mel[0]) == 128, "mel frame geometry")
    check(all(abs(v + 1.5) < 1e-6 for v in mel[0]), "silence sits on the mel floor")

    # schedules and stages
    check(omnikit.pretrain_lr(0, 1000) == 3e-5, "pretrain lr at step 0")
    check(abs(omnikit.pretrain_lr(30, 1000) - 3e-4) < 1e-15, "pretrain lr after warmup")
    check(abs(omnikit.pretrain_lr(950, 1000) - 1.65e-4) < 1e-12, "pretrain lr mid-decay")
    stages = omnikit.builtin_stages()
    check(len(stages) == 9, "nine stages")
    check(stages[4]["name"] == "vision-align-1"
          and stages[4]["trainable"] == ["vision.connector"], "vision-align-1 freeze set")

    # parameter accounting
    params = omnikit.count_params(vocab=122880, hidden=2560, heads=32, kv_heads=8,
                                  head_dim=80, ffn=6912, layers=32)
    check(params["embedding"] == 314572800, "embedding parameter count")
    check(round(params["softmax_head"] / 1e9, 2) == 0.31, "head rounds to 0.31B")

    # search pipeline
    script = ['{"action": "search", "query": "capital-fixture"}',
              "p1", "p2", "p3", "s1", "s2", "s3", "the answer"]
    result = omnikit.run_search_pipeline("what is the capital?", script)
    check(result["answer"] == "the answer", "pipeline answer")
    check(result["states"] == ["Decide", "Search", "Extract", "Extract", "Extract",
                               "Summarize", "Summarize", "Summarize", "Answer"],
          "pipeline state sequence")

    print("smoke test passed")


if __name__ == "__main__":
    main()
