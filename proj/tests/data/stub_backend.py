#!/usr/bin/env python3
"""Protocol stub: echoes a fixed loss for every requested test period."""
import argparse
import json
import sys

p = argparse.ArgumentParser()
p.add_argument("--train", required=True)
p.add_argument("--dev", required=True)
p.add_argument("--test", action="append", default=[])
p.add_argument("--out", required=True)
p.add_argument("--seed", type=int, required=True)
p.add_argument("--config", required=True)
p.add_argument("--mode", default="ok", choices=["ok", "omit_loss", "exit_nonzero", "garbage", "no_output"])
p.add_argument("--loss", type=float, default=3.5)
a = p.parse_args()

with open(a.config) as f:
    cfg = json.load(f)
if len(cfg["test_periods"]) != len(a.test):
    sys.exit("test paths and test_periods disagree")

if a.mode == "exit_nonzero":
    print("trainer crashed", file=sys.stderr)
    sys.exit(7)
if a.mode == "no_output":
    sys.exit(0)
if a.mode == "garbage":
    with open(a.out, "w") as f:
        f.write("{not json")
    sys.exit(0)

results = []
for period in cfg["test_periods"]:
    r = {"test_period": period, "loss_nats_per_token": a.loss, "token_count": 1000}
    if a.mode == "omit_loss":
        del r["loss_nats_per_token"]
    results.append(r)
with open(a.out, "w") as f:
    json.dump({"job": cfg["job"], "dev_loss": a.loss, "results": results}, f)
