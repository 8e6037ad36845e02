#!/usr/bin/env python3
"""Regenerates catalog.jsonl and benchmark.jsonl, then checks every reference
solution against its tests. Run from the fixtures/ directory."""

import json
import os
import subprocess
import sys

HERE = os.path.dirname(os.path.abspath(__file__))

CATALOG = [
    ("arraykit.asarray", "arraykit.asarray(values)",
     "Builds an arraykit.Array from any iterable of numbers. Existing arrays are copied."),
    ("arraykit.tolist", "arraykit.tolist(a)",
     "Returns the contents of an array as a plain Python list of floats."),
    ("arraykit.add", "arraykit.add(a, b)",
     "Elementwise sum of two arrays, or of an array and a scalar (broadcast)."),
    ("arraykit.subtract", "arraykit.subtract(a, b)",
     "Elementwise difference a - b; scalars broadcast."),
    ("arraykit.multiply", "arraykit.multiply(a, b)",
     "Elementwise product of two arrays, or of an array and a scalar (broadcast)."),
    ("arraykit.divide", "arraykit.divide(a, b)",
     "Elementwise quotient a / b; scalars broadcast. Raises ZeroDivisionError on a zero divisor."),
    ("arraykit.where", "arraykit.where(cond, a, b)",
     "Selects a[i] where cond[i] is truthy, else b[i]. cond is an array; a and b may be arrays or scalars."),
    ("arraykit.equal", "arraykit.equal(a, b)",
     "Elementwise equality test returning an array of 1.0/0.0 flags; scalars broadcast."),
    ("arraykit.greater", "arraykit.greater(a, b)",
     "Elementwise a > b test returning an array of 1.0/0.0 flags; scalars broadcast."),
    ("arraykit.maximum", "arraykit.maximum(a, b)",
     "Elementwise maximum of two arrays, or of an array and a scalar (broadcast)."),
    ("arraykit.minimum", "arraykit.minimum(a, b)",
     "Elementwise minimum of two arrays, or of an array and a scalar (broadcast)."),
    ("arraykit.clip", "arraykit.clip(a, lo, hi)",
     "Limits every element into the closed interval [lo, hi]."),
    ("arraykit.sum", "arraykit.sum(a)",
     "Sum of all elements as a float; 0.0 for an empty array."),
    ("arraykit.mean", "arraykit.mean(a)",
     "Arithmetic mean of the elements. Raises ValueError on an empty array."),
    ("arraykit.min", "arraykit.min(a)",
     "Smallest element. Raises ValueError on an empty array."),
    ("arraykit.max", "arraykit.max(a)",
     "Largest element. Raises ValueError on an empty array."),
]


def instance(instance_id, requirement, solution, tests, required):
    return {
        "instance_id": instance_id,
        "requirement": requirement,
        "tests": tests,
        "reference_solution": solution,
        "required_api_ids": required,
    }


INSTANCES = [
    instance(
        "ak-001",
        "Using the arraykit library, write a function scaled_product(xs, ys, offset) that "
        "multiplies two equal-length number lists elementwise, adds a scalar offset to every "
        "product, and returns the result as a plain list of floats.",
        "import arraykit\n"
        "\n"
        "def scaled_product(xs, ys, offset):\n"
        "    a = arraykit.asarray(xs)\n"
        "    b = arraykit.asarray(ys)\n"
        "    return arraykit.tolist(arraykit.add(arraykit.multiply(a, b), offset))\n",
        [
            "assert scaled_product([1, 2], [3, 4], 0.0) == [3.0, 8.0]",
            "assert scaled_product([1, 2, 3], [4, 5, 6], 1.0) == [5.0, 11.0, 19.0]",
            "assert scaled_product([], [], 2.5) == []",
            "assert scaled_product([0], [10], 0.0) == [0.0]",
            "assert scaled_product([-1, 2], [3, -4], 0.0) == [-3.0, -8.0]",
            "assert scaled_product([0.5], [0.5], 0.25) == [0.5]",
            "assert scaled_product([10, 20], [0, 0], -1.0) == [-1.0, -1.0]",
            "assert scaled_product([1.5, 2.5], [2.0, 2.0], 0.5) == [3.5, 5.5]",
            "assert isinstance(scaled_product([1], [1], 0.0), list)",
        ],
        ["arraykit.asarray", "arraykit.multiply", "arraykit.add", "arraykit.tolist"],
    ),
    instance(
        "ak-002",
        "Using the arraykit library, write a function safe_divide(xs, ys, fallback) that "
        "divides xs by ys elementwise but yields the scalar fallback wherever the divisor is "
        "zero, returning a plain list. It must never raise ZeroDivisionError.",
        "import arraykit\n"
        "\n"
        "def safe_divide(xs, ys, fallback):\n"
        "    a = arraykit.asarray(xs)\n"
        "    b = arraykit.asarray(ys)\n"
        "    zero = arraykit.equal(b, 0.0)\n"
        "    safe_b = arraykit.where(zero, 1.0, b)\n"
        "    quotient = arraykit.divide(a, safe_b)\n"
        "    return arraykit.tolist(arraykit.where(zero, fallback, quotient))\n",
        [
            "assert safe_divide([6, 8], [2, 4], -1.0) == [3.0, 2.0]",
            "assert safe_divide([1, 2], [0, 1], 9.0) == [9.0, 2.0]",
            "assert safe_divide([5], [0], 0.0) == [0.0]",
            "assert safe_divide([], [], 7.0) == []",
            "assert safe_divide([1, 2, 3], [0, 0, 0], 4.5) == [4.5, 4.5, 4.5]",
            "assert safe_divide([-6], [3], 0.0) == [-2.0]",
            "assert safe_divide([7, 0], [7, 5], 1.0) == [1.0, 0.0]",
            "assert safe_divide([1], [0.5], 0.0) == [2.0]",
            "assert safe_divide([3, 9, 5], [1, 3, 0], -2.0) == [3.0, 3.0, -2.0]",
        ],
        ["arraykit.asarray", "arraykit.equal", "arraykit.where", "arraykit.divide",
         "arraykit.tolist"],
    ),
    instance(
        "ak-003",
        "Using the arraykit library, write a function normalize_window(xs, lo, hi) that "
        "min-max normalizes a non-constant number list to [0, 1], clips the normalized values "
        "into [lo, hi], and returns a plain list.",
        "import arraykit\n"
        "\n"
        "def normalize_window(xs, lo, hi):\n"
        "    a = arraykit.asarray(xs)\n"
        "    low = arraykit.min(a)\n"
        "    high = arraykit.max(a)\n"
        "    shifted = arraykit.subtract(a, low)\n"
        "    scaled = arraykit.divide(shifted, high - low)\n"
        "    return arraykit.tolist(arraykit.clip(scaled, lo, hi))\n",
        [
            "assert normalize_window([0, 5, 10], 0.0, 1.0) == [0.0, 0.5, 1.0]",
            "assert normalize_window([10, 20], 0.0, 1.0) == [0.0, 1.0]",
            "assert normalize_window([0, 5, 10], 0.2, 0.8) == [0.2, 0.5, 0.8]",
            "assert normalize_window([1, 2, 3, 4], 0.0, 1.0) == [0.0, 1.0/3.0, 2.0/3.0, 1.0]",
            "assert normalize_window([-10, 0, 10], 0.0, 1.0) == [0.0, 0.5, 1.0]",
            "assert normalize_window([0, 100], 0.25, 0.75) == [0.25, 0.75]",
            "assert normalize_window([2, 4, 6, 8], 0.0, 0.5) == [0.0, 1.0/3.0, 0.5, 0.5]",
            "assert normalize_window([5, 0], 0.0, 1.0) == [1.0, 0.0]",
            "assert normalize_window([0.0, 0.5, 1.0], 0.0, 1.0) == [0.0, 0.5, 1.0]",
        ],
        ["arraykit.asarray", "arraykit.min", "arraykit.max", "arraykit.subtract",
         "arraykit.divide", "arraykit.clip", "arraykit.tolist"],
    ),
    instance(
        "ak-004",
        "Using the arraykit library, write a function relu_stats(xs) that clamps every "
        "negative element of a non-empty number list to zero and returns a tuple "
        "(total, average) of the clamped values as floats.",
        "import arraykit\n"
        "\n"
        "def relu_stats(xs):\n"
        "    a = arraykit.asarray(xs)\n"
        "    clamped = arraykit.maximum(a, 0.0)\n"
        "    return arraykit.sum(clamped), arraykit.mean(clamped)\n",
        [
            "assert relu_stats([1, 2, 3]) == (6.0, 2.0)",
            "assert relu_stats([-1, -2, -3]) == (0.0, 0.0)",
            "assert relu_stats([-1, 1]) == (1.0, 0.5)",
            "assert relu_stats([0]) == (0.0, 0.0)",
            "assert relu_stats([2.5, -2.5]) == (2.5, 1.25)",
            "assert relu_stats([10, -10, 20, -20]) == (30.0, 7.5)",
            "assert relu_stats([-0.5, 0.5, 1.5]) == (2.0, 2.0/3.0)",
            "assert isinstance(relu_stats([1])[0], float)",
            "assert isinstance(relu_stats([1])[1], float)",
            "assert relu_stats([100]) == (100.0, 100.0)",
        ],
        ["arraykit.asarray", "arraykit.maximum", "arraykit.sum", "arraykit.mean"],
    ),
    instance(
        "ak-005",
        "Using the arraykit library, write a function winners(xs, ys) for two equal-length "
        "score lists that returns a tuple (best, first_count) where best is the plain list of "
        "elementwise larger scores and first_count is the number of positions where xs is "
        "strictly greater than ys.",
        "import arraykit\n"
        "\n"
        "def winners(xs, ys):\n"
        "    a = arraykit.asarray(xs)\n"
        "    b = arraykit.asarray(ys)\n"
        "    best = arraykit.maximum(a, b)\n"
        "    from_first = arraykit.greater(a, b)\n"
        "    return arraykit.tolist(best), int(arraykit.sum(from_first))\n",
        [
            "assert winners([1, 5], [2, 3]) == ([2.0, 5.0], 1)",
            "assert winners([], []) == ([], 0)",
            "assert winners([1, 1], [1, 1]) == ([1.0, 1.0], 0)",
            "assert winners([3, 4, 5], [1, 9, 5]) == ([3.0, 9.0, 5.0], 1)",
            "assert winners([-1, -2], [-3, -1]) == ([-1.0, -1.0], 1)",
            "assert winners([0.5], [0.25]) == ([0.5], 1)",
            "assert winners([2, 2, 2], [3, 3, 3]) == ([3.0, 3.0, 3.0], 0)",
            "assert winners([10, 0], [0, 10]) == ([10.0, 10.0], 1)",
            "assert winners([7, 8, 9], [7, 7, 10]) == ([7.0, 8.0, 10.0], 1)",
        ],
        ["arraykit.asarray", "arraykit.maximum", "arraykit.greater", "arraykit.sum",
         "arraykit.tolist"],
    ),
]


def main():
    catalog_path = os.path.join(HERE, "catalog.jsonl")
    with open(catalog_path, "w") as out:
        for api_id, signature, description in CATALOG:
            record = {
                "api_id": api_id,
                "name": api_id,
                "signature": signature,
                "description": description,
            }
            out.write(json.dumps(record) + "\n")
    print("wrote %s (%d APIs)" % (catalog_path, len(CATALOG)))

    benchmark_path = os.path.join(HERE, "benchmark.jsonl")
    with open(benchmark_path, "w") as out:
        for record in INSTANCES:
            out.write(json.dumps(record) + "\n")
    tests = [len(i["tests"]) for i in INSTANCES]
    apis = [len(i["required_api_ids"]) for i in INSTANCES]
    print("wrote %s (%d instances, avg tests %.2f, avg APIs %.2f)"
          % (benchmark_path, len(INSTANCES), sum(tests) / len(tests),
             sum(apis) / len(apis)))

    demo_rules = [
        {"match": "selected APIs",
         "responses": ["Requirement: initial task {{prompt_hash}}\n\n```python\ndef task(x):\n"
                       "    return x\n```\n"]},
        {"match": "Integrate the ideas",
         "responses": ["Requirement: merged task {{prompt_hash}}\n\n```python\ndef task(x):\n"
                       "    return x\n```\n"]},
        {"match": "small unit tests",
         "responses": ["```python\nassert task(2) == 2\n```\n"]},
        {"match": "Assess the following",
         "responses": ["```json\n{\"realistic\": \"yes\", \"satisfies\": \"yes\", "
                       "\"rationale\": \"ok\"}\n```\n"]},
        {"match": "Decompose the following coding requirement",
         "responses": ["1. build arrays from the inputs\n"
                       "2. combine them elementwise\n"
                       "3. reduce or convert the result\n"]},
        {"match": "Rank the candidate APIs",
         "responses": ["arraykit.asarray\narraykit.multiply\narraykit.add\n"
                       "arraykit.tolist\narraykit.sum\n"]},
    ]
    for inst in INSTANCES:
        fn = inst["requirement"].split("function ")[1].split("(")[0]
        demo_rules.append({
            "match": fn,
            "responses": ["```python\n" + inst["reference_solution"] + "\n```\n"],
        })
    script_path = os.path.join(HERE, "demo_mock_script.json")
    with open(script_path, "w") as out:
        json.dump({"rules": demo_rules}, out, indent=2)
        out.write("\n")
    print("wrote %s" % script_path)

    env = dict(os.environ)
    env["PYTHONPATH"] = os.path.join(HERE, "pylib")
    failures = 0
    for inst in INSTANCES:
        program = inst["reference_solution"] + "\n\n" + "\n".join(inst["tests"]) + "\n"
        proc = subprocess.run([sys.executable, "-c", program], env=env,
                              capture_output=True, text=True)
        if proc.returncode != 0:
            failures += 1
            print("reference FAILED for %s:\n%s" % (inst["instance_id"], proc.stderr))
        else:
            print("reference ok for %s" % inst["instance_id"])
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
