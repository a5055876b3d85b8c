"""Queue-mode human review, with a scripted reviewer standing in for a person.

The loop writes ``pending_review_iter<N>.json`` and blocks until a matching
``decisions_iter<N>.json`` appears.  The reviewer thread below approves every
assert and rejects every cover, which is enough to close this design.
"""

import json
import tempfile
import threading
import time
from importlib import resources
from pathlib import Path

from covloop.closure import ClosureConfig, HilMode, Reviewer, run_closure
from covloop.rtl.parser import parse_source

(unit,) = parse_source(resources.files("covloop.corpus").joinpath("mux2.v").read_text(), "mux2.v")
queue = Path(tempfile.mkdtemp(prefix="covloop_review_"))
stop = threading.Event()


def reviewer():
    answered = set()
    while not stop.is_set():
        for request in sorted(queue.glob("pending_review_iter*.json")):
            if request.name in answered:
                continue
            doc = json.loads(request.read_text())
            decisions = [{"name": p["name"], "decision": "reject" if p["kind"] == "COVER" else "approve"}
                         for p in doc["properties"]]
            n = request.stem.rsplit("iter", 1)[1]
            (queue / f"decisions_iter{n}.json").write_text(json.dumps({"decisions": decisions}))
            answered.add(request.name)
            print(f"reviewed {request.name}: {len(decisions)} decisions")
        time.sleep(0.02)


thread = threading.Thread(target=reviewer, daemon=True)
thread.start()
result = run_closure(unit, "", ClosureConfig(hil=HilMode.QUEUE),
                     reviewer=Reviewer(HilMode.QUEUE, queue, timeout_s=30, poll_s=0.02))
stop.set()
print(f"outcome {result.state.outcome.value} after {len(result.state.history)} iterations")
for rec in result.state.history:
    for d in rec.decisions:
        print(f"  iter {rec.iteration}  {d['decision']:8s} {d['name']}")
