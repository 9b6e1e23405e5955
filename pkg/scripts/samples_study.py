"""MSE with a finite number of captured samples, for the ideal low-pass and raised-cosine kernels."""
from dataclasses import dataclass, replace

from _common import Timer, parse_config, write
from ddident import harness
from ddident.model import SamplerSpec


@dataclass
class Config:
    counts: tuple = (248, 500, 1000)
    raised_cosine_counts: tuple = (246, 498, 996)  # p = 6 needs multiples of 6
    snr_db: tuple = (30.0, 40.0, 50.0, 60.0)
    trials: int = 100
    seed: int = 0
    out: str = "results"


def main(cfg: Config):
    ideal = harness.reference_scenario(snr_grid=cfg.snr_db, trials=cfg.trials, seed=cfg.seed)
    rc = replace(ideal, probe=harness.make_probe(p=6, N=30),
                 sampler=SamplerSpec("raised_cosine_rolloff1", active_channels=(2, 3, 4, 5)))
    with Timer():
        rows = [("ideal_lowpass",) + r for r in harness.samples_study(ideal, cfg.counts)]
        rows += [("raised_cosine_rolloff1",) + r for r in harness.samples_study(rc, cfg.raised_cosine_counts)]
    lines = ["kernel,capture_count,snr_db,e2_delay,e2_doppler,failures"]
    for kernel, _, count, r in rows:
        lines.append(f"{kernel},{count},{r.snr_db!r},{r.e2_delay!r},{r.e2_doppler!r},{r.failures}")
    write(cfg.out, "samples_study.csv", "\n".join(lines) + "\n")


if __name__ == "__main__":
    main(parse_config(Config, __doc__))
