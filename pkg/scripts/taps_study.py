"""MSE versus SNR for several correction-filter lengths; exposes the truncation error floor."""
from dataclasses import dataclass

from _common import Timer, parse_config, write
from ddident import harness


@dataclass
class Config:
    taps: tuple = (35, 49)
    snr_db: tuple = (40.0, 50.0, 60.0, 70.0)
    trials: int = 100
    seed: int = 0
    out: str = "results"


def main(cfg: Config):
    sc = harness.reference_scenario(snr_grid=cfg.snr_db, trials=cfg.trials, seed=cfg.seed)
    with Timer():
        rows = harness.taps_study(sc, cfg.taps)
    write(cfg.out, "taps_study.csv", harness.study_csv(rows))


if __name__ == "__main__":
    main(parse_config(Config, __doc__))
