#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The Dockwright Authors
"""Generates test fixtures: round-trip Dockerfiles under tests/fixtures/dockerfiles
and the small corpora under tests/fixtures/*.jsonl.

Output is deterministic (fixed seed), so rerunning only rewrites identical
files. The generator deliberately mixes well-formed and odd inputs: CRLF
line ends, tabs, continuations, comments inside continuations, parser
directives, heredocs, lowercase keywords, stray bytes, no final newline.
"""

import json
import pathlib
import random

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
OUT = FIXTURES / "dockerfiles"

BASES = ["ubuntu", "ubuntu:latest", "ubuntu:20.04", "ubuntu:18.04", "debian:buster-slim",
         "alpine:3.12", "python:3.8-slim", "node:14", "ruby:2.6.3", "golang:1.15",
         "openjdk:11-jre", "nginx", "scratch", "php:7.4-apache", "mcr.microsoft.com/dotnet/sdk:5.0"]
PKGS = ["curl", "git", "python-pip", "build-essential", "wget", "ca-certificates", "make",
        "libssl-dev", "vim", "unzip", "jq", "gcc"]
KEYWORDS = ["RUN", "COPY", "ADD", "ENV", "ARG", "WORKDIR", "EXPOSE", "CMD", "ENTRYPOINT",
            "USER", "LABEL", "VOLUME", "HEALTHCHECK", "SHELL", "ONBUILD", "STOPSIGNAL"]


def run_line(rng):
    pkgs = rng.sample(PKGS, rng.randint(1, 4))
    style = rng.randint(0, 4)
    if style == 0:
        return f"RUN apt-get update && apt-get install -y {' '.join(pkgs)}"
    if style == 1:
        parts = ["RUN apt-get update \\"] + [f"    && apt-get install -y {p} \\" for p in pkgs[:-1]]
        parts.append(f"    && apt-get install -y {pkgs[-1]}")
        return "\n".join(parts)
    if style == 2:
        return f'RUN ["/bin/sh", "-c", "echo {pkgs[0]}"]'
    if style == 3:
        return "RUN set -eux; \\\n# a comment inside the continuation\n    make -j4; \\\n\n    make install"
    return f"run pip install {' '.join(pkgs)}"


def other_line(rng):
    kw = rng.choice(KEYWORDS)
    arg = {
        "RUN": lambda: run_line(rng),
        "COPY": lambda: rng.choice(["COPY . /app", "COPY --from=build /out /srv", "copy a b"]),
        "ADD": lambda: "ADD https://example.com/x.tar.gz /opt/",
        "ENV": lambda: rng.choice(["ENV LANG C.UTF-8", "ENV A=1 B=2 \\\n    C=3"]),
        "ARG": lambda: rng.choice(["ARG DEBIAN_FRONTEND=noninteractive", "ARG VERSION"]),
        "WORKDIR": lambda: "WORKDIR /app",
        "EXPOSE": lambda: f"EXPOSE {rng.randint(1, 65535)}",
        "CMD": lambda: rng.choice(['CMD ["npm", "start"]', "CMD python app.py"]),
        "ENTRYPOINT": lambda: 'ENTRYPOINT ["/docker-entrypoint.sh"]',
        "USER": lambda: "USER nobody",
        "LABEL": lambda: 'LABEL maintainer="someone@example.com"',
        "VOLUME": lambda: "VOLUME /data",
        "HEALTHCHECK": lambda: "HEALTHCHECK --interval=30s CMD curl -f http://localhost/ || exit 1",
        "SHELL": lambda: 'SHELL ["/bin/bash", "-c"]',
        "ONBUILD": lambda: "ONBUILD RUN make",
        "STOPSIGNAL": lambda: "STOPSIGNAL SIGTERM",
    }[kw]()
    return arg


def odd_line(rng):
    return rng.choice([
        "", "   ", "\t", "# comment", "#", "  # indented comment", "FROMX ubuntu",
        "MAINTAINER someone", "bogus instruction here", "RUN echo café", "RUN echo \\",
        "\\", "RUN <<EOF\necho heredoc\nEOF", "RUN echo trailing   ", "\tRUN echo tab",
    ])


def dockerfile(rng, i):
    lines = []
    if rng.random() < 0.15:
        lines.append(rng.choice(["# syntax=docker/dockerfile:1", "# escape=`", "# escape=\\"]))
    if rng.random() < 0.3:
        lines.append("# generated fixture %d" % i)
    stages = 1 + (rng.random() < 0.2)
    for s in range(stages):
        base = rng.choice(BASES)
        lines.append(f"FROM {base}" + (f" AS stage{s}" if stages > 1 else ""))
        for _ in range(rng.randint(0, 10)):
            r = rng.random()
            lines.append(odd_line(rng) if r < 0.2 else other_line(rng))
    text = "\n".join(lines)
    if rng.random() < 0.1:
        text = text.replace("\n", "\r\n")
    if rng.random() < 0.8:
        text += "\r\n" if "\r\n" in text else "\n"
    if rng.random() < 0.05:
        text += "\n\n\n"
    data = text.encode("utf-8")
    if rng.random() < 0.05:
        cut = rng.randint(0, len(data))
        data = data[:cut] + bytes([rng.randint(0x80, 0xff)]) + data[cut:]
    return data


def record(rid, dockerfile_text, stderr, outcome="failure", stdout="", duration=42.5):
    return {
        "id": rid,
        "repo": f"https://github.com/example/{rid}",
        "dockerfile_path": "Dockerfile",
        "dockerfile": dockerfile_text,
        "stdout": stdout,
        "stderr": stderr,
        "outcome": outcome,
        "duration_s": duration,
        "captured_at": "2020-11-02T10:00:00Z",
        "meta": {"stars": "12"},
    }


def write_jsonl(path, rows, extra_lines=()):
    lines = [json.dumps(r, ensure_ascii=False, sort_keys=False) for r in rows]
    lines.extend(extra_lines)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def two_blob(rng):
    """Two log families, ten failing records each."""
    pkgs = ["python-pip", "curl", "libxml2-dev", "openjdk-8-jdk", "php7.2", "nodejs-legacy",
            "python-dev", "mysql-client", "libpng12-dev", "gcc-4.8"]
    rows = []
    for i, pkg in enumerate(pkgs):
        hexid = "%012x" % rng.getrandbits(48)
        log = (f"Step 3/5 : RUN apt-get -y install {pkg}\n"
               f" ---> Running in {hexid}\n"
               "Reading package lists...\n"
               "Building dependency tree...\n"
               "Reading state information...\n"
               f"E: Unable to locate package {pkg}\n"
               f"The command '/bin/sh -c apt-get -y install {pkg}' returned a non-zero code: 100\n")
        df = f"FROM ubuntu:latest\nRUN apt-get update\nRUN apt-get -y install {pkg}\n"
        rows.append(record(f"apt-{i:02d}", df, log))
    for i in range(10):
        have = f"2.{rng.randint(3, 6)}.{rng.randint(0, 9)}"
        want = f"2.{rng.randint(3, 7)}.{rng.randint(0, 9)}"
        hexid = "%012x" % rng.getrandbits(48)
        log = (f"Step 4/6 : RUN bundle install\n"
               f" ---> Running in {hexid}\n"
               f"Your Ruby version is {have}, but your Gemfile specified {want}\n"
               "The command '/bin/sh -c bundle install' returned a non-zero code: 18\n")
        df = f"FROM ruby:{have}\nWORKDIR /app\nCOPY Gemfile Gemfile.lock ./\nRUN bundle install\n"
        rows.append(record(f"gem-{i:02d}", df, log))
    return rows


def demo(rules):
    """One record per shipped repair fixture plus suggestion, unknown and
    non-failure records."""
    rows = []
    for r in rules["repairs"]:
        for j, fx in enumerate(r.get("fixtures", [])):
            rows.append(record(f"{r['id']}" + (f"-{j}" if j else ""), fx["dockerfile"], fx["log"]))
    rows.append(record(
        "npm-1",
        "FROM node:14\nWORKDIR /app\nCOPY . .\nRUN npm install\nRUN npm run build\n",
        "npm ERR! code ELIFECYCLE\nnpm ERR! errno 1\nnpm ERR! app@1.0.0 build: `webpack`\n"))
    rows.append(record(
        "mystery-1",
        "FROM python:3.8\nRUN pip install -r requirements.txt\n",
        "Traceback (most recent call last):\n  File \"setup.py\", line 3\n"
        "ModuleNotFoundError: No module named 'numpy'\n"))
    rows.append(record("ok-1", "FROM scratch\nCOPY hello /\n", "", outcome="success",
                       stdout="Successfully built 0123456789ab\n", duration=3.0))
    rows.append(record("slow-1", "FROM ubuntu:18.04\nRUN sleep 4000\n", "", outcome="timeout",
                       duration=1800.0))
    return rows


def main():
    rng = random.Random(20201215)
    OUT.mkdir(parents=True, exist_ok=True)
    for i in range(220):
        (OUT / f"{i:03d}.Dockerfile").write_bytes(dockerfile(rng, i))
    write_jsonl(FIXTURES / "two_blob.jsonl", two_blob(random.Random(3)))
    rules = json.loads((ROOT / "data" / "rules.json").read_text())
    write_jsonl(FIXTURES / "demo.jsonl", demo(rules))
    ok = two_blob(random.Random(3))[:2]
    write_jsonl(FIXTURES / "with_rejects.jsonl", ok, ['{"id": "broken", "repo": '])
    print(f"wrote 220 Dockerfiles and 3 corpora under {FIXTURES}")


if __name__ == "__main__":
    main()
