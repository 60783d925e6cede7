"""CLI contract checks: exit codes, apply/inspect output, config layering, verify.

usage: check_cli.py <editforge> <synth_corpus>
"""

import json
import os
import subprocess
import sys
import tempfile

EDITFORGE, SYNTH = sys.argv[1], sys.argv[2]
failures = []


def run(*args, env=None):
    full_env = dict(os.environ)
    full_env.pop("EDITFORGE_TRANSCODER", None)
    full_env.update(env or {})
    return subprocess.run([EDITFORGE, *args], capture_output=True, text=True, env=full_env)


def check(ok, what):
    print(("ok    " if ok else "FAIL  ") + what)
    if not ok:
        failures.append(what)


with tempfile.TemporaryDirectory() as tmp:
    corpus = os.path.join(tmp, "corpus")
    subprocess.run([SYNTH, corpus, "--languages", "en_US", "--speakers", "2", "--utterances", "15"], check=True,
                   capture_output=True)
    wav = next(os.path.join(d, f) for d, _, fs in sorted(os.walk(corpus)) for f in sorted(fs) if f.endswith(".wav"))
    out_wav = os.path.join(tmp, "out.wav")

    r = run("--help")
    check(r.returncode == 0 and "apply" in r.stdout, "--help exits 0")
    r = run()
    check(r.returncode == 2, "no subcommand exits 2")
    r = run("apply", wav, "warble", out_wav)
    check(r.returncode == 2 and "warble" in r.stderr and "Usage" in r.stderr and r.stdout == "",
          "unknown edit exits 2 with usage on stderr")
    r = run("apply", wav, "pitch_up", out_wav, "--param", "nope=1")
    check(r.returncode == 2, "unknown parameter exits 2")
    r = run("apply", os.path.join(tmp, "missing.wav"), "reverb", out_wav)
    check(r.returncode == 1 and "missing.wav" in r.stderr, "missing input exits 1")

    r = run("apply", wav, "pitch_up", out_wav, "--seed", "4", "--param", "semitones=12")
    spec = json.loads(r.stdout) if r.returncode == 0 else {}
    check(spec.get("name") == "pitch_up" and spec.get("params") == {"semitones": 12} and spec.get("seed") == 4,
          "apply prints the resolved spec with the override")
    r = run("apply", wav, "concat_trim", out_wav, "--seed", "2", "--param", "mode=trim")
    spec = json.loads(r.stdout) if r.returncode == 0 else {}
    check("locus" in spec and set(spec.get("params", {})) >= {"fraction", "position"},
          "apply fills sampled params and the locus")

    r = run("inspect", out_wav)
    info = json.loads(r.stdout) if r.returncode == 0 else {}
    check({"duration_s", "rms", "peak_frequency_hz"} <= set(info), "inspect reports duration, rms, peak frequency")

    manifest = os.path.join(tmp, "m.jsonl")
    r = run("gen", "--human-root", corpus, "--labels", "original_voice,mp3_compression", "--n-per-label", "2",
            "--split-ratio", "0.5", "--train-multiplier", "1", "--out", manifest,
            env={"EDITFORGE_TRANSCODER": "/nonexistent/bin/ffmpeg-x"})
    check(r.returncode == 1 and "/nonexistent/bin/ffmpeg-x" in r.stderr and not os.path.exists(manifest),
          "missing transcoder fails fast naming the binary")

    config = os.path.join(tmp, "cfg.json")
    with open(config, "w") as f:
        json.dump({"human_root": corpus, "labels": [1, 6], "n_per_label": 3, "train_multiplier": 2,
                   "split_ratio": 0.7, "seed": 1}, f)
    r = run("gen", "--config", config, "--seed", "8", "--out", manifest)
    check(r.returncode == 0, "gen from config + flags")
    with open(manifest) as f:
        header = json.loads(f.readline())
    check(header["config"]["seed"] == 8 and header["config"]["n_per_label"] == 3, "flags win over the config file")
    r = run("verify", "--manifest", manifest)
    check(r.returncode == 0, "verify passes on a fresh manifest")
    r = run("verify", "--manifest", manifest, "--config", config)
    check(r.returncode == 1 and "FAIL" in r.stdout, "verify flags a config/manifest mismatch")

    with open(manifest) as f:
        lines = f.readlines()
    header["config"]["seed"] = 99
    with open(manifest, "w") as f:
        f.write(json.dumps(header) + "\n" + "".join(lines[1:]))
    r = run("verify", "--manifest", manifest)
    check(r.returncode == 1, "verify flags an edited embedded config")

    bad = os.path.join(tmp, "bad.json")
    with open(bad, "w") as f:
        json.dump({"human_root": corpus, "colour": "blue"}, f)
    r = run("gen", "--config", bad, "--out", os.path.join(tmp, "x.jsonl"))
    check(r.returncode == 1 and "colour" in r.stderr, "unknown config key is reported")

sys.exit(1 if failures else 0)
