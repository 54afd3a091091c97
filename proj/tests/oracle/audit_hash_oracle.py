#!/usr/bin/env python3
# Copyright 2026 The MCP Gateway Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Standalone recomputation of audit record hashes, independent of the C++
# code. Used to freeze the expected digests in tests/unit/audit_test.cc.
#
#   hash = SHA-256(prev_hash || canonical_json({seq, observed_at, kind, summary}))
import hashlib
import json
import sys


def canonical(seq, observed_at, kind, summary):
    return json.dumps(
        {"seq": seq, "observed_at": observed_at, "kind": kind, "summary": summary},
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )


def chain(records):
    prev = bytes(32)
    for seq, observed_at, kind, summary in records:
        digest = hashlib.sha256(prev + canonical(seq, observed_at, kind, summary).encode()).digest()
        yield digest.hex()
        prev = digest


if __name__ == "__main__":
    fixture = [
        (0, 1760000000000, "exchange", {"route": "helloworld-router", "method": "GET", "status": "200"}),
        (1, 1760000000250, "auth_event", {"event": "token_issued", "subject": "alice", "note": "café ✓"}),
    ]
    if len(sys.argv) > 1:
        # Verify an audit log file line by line.
        prev = bytes(32)
        for i, line in enumerate(open(sys.argv[1], encoding="utf-8")):
            r = json.loads(line)
            c = canonical(r["seq"], r["observed_at"], r["kind"], r["summary"])
            d = hashlib.sha256(prev + c.encode()).digest()
            if r["seq"] != i or r["prev_hash"] != prev.hex() or r["hash"] != d.hex():
                print(f"broken at {i}")
                sys.exit(1)
            prev = d
        print("ok")
    else:
        for h in chain(fixture):
            print(h)
