"""MSE for alternating +-1 probing sequences of period r with 49-tap corrections."""
from dataclasses import dataclass

from _common import Timer, parse_config, write
from ddident import harness
from ddident.model import SamplerSpec


@dataclass
class Config:
    periods: tuple = (1, 2, 4, 32)
    N: int = 32
    taps: int = 49
    snr_db: tuple = (40.0, 50.0, 60.0, 70.0)
    trials: int = 100
    seed: int = 0
    out: str = "results"


def main(cfg: Config):
    sc = harness.reference_scenario(snr_grid=cfg.snr_db, trials=cfg.trials, seed=cfg.seed,
                                    sampler=SamplerSpec(correction_taps=cfg.taps))
    with Timer():
        rows = harness.probe_study(sc, cfg.periods, cfg.N)
    write(cfg.out, "probe_study.csv", harness.study_csv(rows))


if __name__ == "__main__":
    main(parse_config(Config, __doc__))
