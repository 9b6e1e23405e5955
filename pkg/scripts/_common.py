"""Shared plumbing for the experiment scripts: dataclass config from command-line flags, output paths."""
import argparse
import dataclasses
import os
import time


def parse_config(cls, description):
    """Expose every field of the dataclass `cls` as --field-name; tuples take comma-separated values."""
    ap = argparse.ArgumentParser(description=description)
    for f in dataclasses.fields(cls):
        default = f.default
        flag = "--" + f.name.replace("_", "-")
        if isinstance(default, tuple):
            elem = type(default[0]) if default else float
            ap.add_argument(flag, default=default, type=lambda s, e=elem: tuple(e(v) for v in s.split(",")))
        elif isinstance(default, bool):
            ap.add_argument(flag, default=default, action=argparse.BooleanOptionalAction)
        else:
            ap.add_argument(flag, default=default, type=type(default) if default is not None else str)
    return cls(**vars(ap.parse_args()))


def write(out_dir, name, text):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write(text)
    print(text, end="")
    print(f"# wrote {path}")


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        print(f"# elapsed {time.perf_counter() - self.t0:.1f}s")
