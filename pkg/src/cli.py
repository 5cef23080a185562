"""
Linha de comando do laboratorio.

Uso:
    python -m src.cli gen-data --n 50000 --seed 7
    python -m src.cli tune --mapping f3
    python -m src.cli apply --all
    python -m src.cli oracle-check --draws 5

Codigos de saida: 0 sucesso, 2 erro de validacao/configuracao,
3 erro de qualidade numerica.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src import __version__
from src.config import (
    DATASET_FILENAME,
    DEFAULT_SEED,
    ENGINE_DEFAULTS,
    LOG_LEVEL,
    MAPPINGS,
    N_FOLDS,
    N_ITER,
    RESULTS_DIR,
    SCENARIO_SIZE,
    SWEEP_SIZES,
    TRAIN_FRACTION,
    WORKERS,
)
from src.engine.counting_stats import contour_cumulants, cumulants, finite_difference_cumulants
from src.engine.model import VARIED_FIELDS, build_generator
from src.engine.trajectory import compare_with_analytic
from src.evaluation.metrics import ConfusionMatrix, accuracy
from src.evaluation.reports import class_report, mapping_table, render_confusion
from src.exceptions import DomainError, NumericalQualityError
from src.experiments.pipeline import PipelineResult, run_pipeline
from src.experiments.scenarios import ScenarioSpec, run_all_scenarios, run_scenario, scenario_table
from src.experiments.sweep import run_size_sweep
from src.extract.csv_reader import read_csv
from src.extract.generator import draw_params, generate
from src.load.dataset_store import write_csv, write_dat, write_table
from src.models.knn import KnnClassifier, KnnHyperParams
from src.transform.dataset import ParameterRanges
from src.transform.labels import class_histograms
from src.utils.seeding import substream

logger = logging.getLogger(__name__)

# Tolerancia relativa do oraculo de cumulantes
ORACLE_RTOL = 1e-6
ORACLE_ATOL = 1e-9
# Desvio maximo, em erros padrao, do oraculo de trajetorias
ORACLE_MAX_Z = 3.0


class RunConfig(BaseModel):
    """Configuracao de uma execucao (arquivo JSON passado em --config)."""

    model_config = ConfigDict(extra="forbid")

    engine: Dict[str, float] = Field(default_factory=lambda: dict(ENGINE_DEFAULTS))
    ranges: ParameterRanges = Field(default_factory=ParameterRanges)
    folds: int = Field(N_FOLDS, ge=2)
    n_iter: int = Field(N_ITER, ge=1)
    train_fraction: float = Field(TRAIN_FRACTION, gt=0, lt=1)
    workers: int = Field(WORKERS, ge=1)
    scale: bool = False

    @field_validator("engine")
    @classmethod
    def _check_engine(cls, engine: Dict[str, float]) -> Dict[str, float]:
        unknown = set(engine) - set(ENGINE_DEFAULTS)
        if unknown:
            raise ValueError(
                f"Parametros do motor nao reconhecidos: {sorted(unknown)}. "
                f"Opcoes validas: {list(ENGINE_DEFAULTS)}"
            )
        return {**ENGINE_DEFAULTS, **engine}

    @classmethod
    def load(cls, path: Optional[str]) -> "RunConfig":
        if path is None:
            return cls()
        return cls.model_validate_json(Path(path).read_text())


# =============================================================================
# Auxiliares
# =============================================================================

def _dataset_path(args) -> Path:
    return Path(args.data) if args.data else Path(args.out) / DATASET_FILENAME


def _model_path(out: Path, mapping: str) -> Path:
    return out / f"model_{mapping}.json"


def _write_evaluation(out: Path, mapping: str, confusion: ConfusionMatrix) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / f"confusion_{mapping}.txt").write_text(render_confusion(confusion) + "\n")
    write_table(class_report(confusion), out / f"class_report_{mapping}.csv")


def _save_pipeline(out: Path, result: PipelineResult) -> None:
    _model_path(out, result.mapping).write_text(result.model.to_json())
    _write_evaluation(out, result.mapping, result.confusion)
    write_table(mapping_table([result], include_timings=False), out / f"mapping_{result.mapping}.csv")
    write_table(mapping_table([result]), out / f"timings_{result.mapping}.csv")

    if result.search is not None:
        trials = pd.DataFrame([
            {**t.hyperparams.model_dump(), "score": t.score}
            for t in result.search.trials
        ])
        write_table(trials, out / f"search_{result.mapping}.csv")

    print(render_confusion(result.confusion))
    print(f"{result.mapping}: A_t={result.train_accuracy:.2f}% a_i={result.validation_accuracy:.2f}%")


def _load_model(path: Path) -> KnnClassifier:
    if not path.exists():
        raise FileNotFoundError(f"Modelo nao encontrado: {path}")
    return KnnClassifier.from_json(path.read_text())


# =============================================================================
# Subcomandos
# =============================================================================

def cmd_gen_data(args, config: RunConfig) -> int:
    dataset = generate(
        args.n,
        ranges=config.ranges,
        seed=args.seed,
        p_h_values=args.p_h_values,
        workers=config.workers,
        fixed_params=config.engine,
        train_fraction=config.train_fraction,
    )
    path = write_csv(dataset, _dataset_path(args))
    print(f"{len(dataset)} amostras gravadas em {path}")
    return 0


def cmd_train(args, config: RunConfig) -> int:
    dataset = read_csv(_dataset_path(args))
    hyperparams = KnnHyperParams(k=args.k, weighting=args.weighting, metric=args.metric)
    result = run_pipeline(
        args.mapping, dataset, seed=args.seed, tune=False, hyperparams=hyperparams,
        folds=config.folds, scale=config.scale,
    )
    _save_pipeline(Path(args.out), result)
    return 0


def cmd_tune(args, config: RunConfig) -> int:
    dataset = read_csv(_dataset_path(args))
    mappings = list(MAPPINGS) if args.mapping == "all" else [args.mapping]
    results = []
    for mapping in mappings:
        result = run_pipeline(
            mapping, dataset, seed=args.seed, tune=True,
            n_iter=args.n_iter or config.n_iter, folds=config.folds,
            scale=config.scale, workers=config.workers,
        )
        _save_pipeline(Path(args.out), result)
        results.append(result)
    if len(results) > 1:
        write_table(mapping_table(results, include_timings=False), Path(args.out) / "mapping_table.csv")
    return 0


def cmd_evaluate(args, config: RunConfig) -> int:
    dataset = read_csv(_dataset_path(args))
    model = _load_model(Path(args.model))
    x_val = dataset.features(model.mapping, "validation")
    y_val = dataset.labels("validation")

    confusion = ConfusionMatrix.from_predictions(model.predict(x_val), y_val)
    _write_evaluation(Path(args.out), model.mapping, confusion)
    print(render_confusion(confusion))
    print(f"{model.mapping}: a_i={accuracy(confusion):.2f}%")
    return 0


def cmd_apply(args, config: RunConfig) -> int:
    out = Path(args.out)
    if args.all:
        models = {}
        for mapping in MAPPINGS:
            path = _model_path(out, mapping)
            if path.exists():
                models[mapping] = _load_model(path)
            else:
                logger.warning(f"Modelo {path.name} ausente; cenarios de {mapping} ignorados")
        if not models:
            raise FileNotFoundError(f"Nenhum modelo model_f*.json em {out}")
        table = run_all_scenarios(models, n=args.n, seed=args.seed)
    else:
        if not args.scenario:
            raise DomainError("Informe --scenario <spec.json> ou --all")
        spec = ScenarioSpec.model_validate_json(Path(args.scenario).read_text())
        model = _load_model(Path(args.model) if args.model else _model_path(out, args.mapping))
        table = scenario_table([run_scenario(model, spec)])

    write_table(table, out / "scenarios.csv")
    print(table[["mapping", "first", "second", "winner", "unit_0", "unit_3"]].to_string(index=False))
    return 0


def cmd_sweep(args, config: RunConfig) -> int:
    table = run_size_sweep(
        args.sizes, mapping=args.mapping, seed=args.seed, estimator=args.estimator,
        ranges=config.ranges, folds=config.folds, workers=config.workers, out_dir=args.out,
    )
    print(table.to_string(index=False))
    return 0


def cmd_oracle_check(args, config: RunConfig) -> int:
    """
    Confere os cumulantes perturbativos com os dois oraculos numericos e,
    sem coerencia, com a simulacao de trajetorias.
    """
    if args.draws < 1:
        raise DomainError(f"--draws deve ser >= 1, recebido {args.draws}")
    rows = []
    for i in range(args.draws):
        params = draw_params(config.ranges, config.engine, substream(args.seed, i))
        gen = build_generator(params)
        j = cumulants(gen)
        fd = finite_difference_cumulants(gen)
        contour = contour_cumulants(gen)
        row = {"draw": i, **{name: getattr(params, name) for name in VARIED_FIELDS}}
        for order in range(4):
            row[f"j{order + 1}"] = j[order]
            row[f"fd_dev{order + 1}"] = abs(fd[order] - j[order])
            row[f"contour_dev{order + 1}"] = abs(contour[order] - j[order])
        row["contour_ok"] = bool(np.all(np.isclose(contour, j, rtol=ORACLE_RTOL, atol=ORACLE_ATOL)))
        row["fd_ok"] = bool(np.all(np.isclose(fd, j, rtol=ORACLE_RTOL, atol=ORACLE_ATOL)))

        if not args.skip_trajectories:
            comparison = compare_with_analytic(params, args.t_final, args.n_traj, args.seed + i)
            row.update({key: comparison[key] for key in ("j1_empirical", "j1_z", "j2_empirical", "j2_z")})
        rows.append(row)

    table = pd.DataFrame(rows)
    write_table(table, Path(args.out) / "oracle_check.csv")
    print(table.to_string(index=False))

    for column, name in (("contour_ok", "contorno"), ("fd_ok", "diferencas finitas")):
        failed = table.loc[~table[column], "draw"].tolist()
        if failed:
            raise NumericalQualityError(
                f"Oraculo de {name} diverge nos sorteios {failed} (rtol={ORACLE_RTOL:.0e})"
            )
    if not args.skip_trajectories:
        z_worst = np.abs(table[["j1_z", "j2_z"]].to_numpy()).max()
        if z_worst > ORACLE_MAX_Z:
            raise NumericalQualityError(f"Trajetorias a {z_worst:.2f} erros padrao do analitico")
    return 0


def cmd_hist(args, config: RunConfig) -> int:
    dataset = read_csv(_dataset_path(args))
    table = class_histograms(dataset, bins=args.bins)
    out = Path(args.out)
    write_table(table, out / "class_histograms.csv")
    for feature, group in table.groupby("feature"):
        wide = group.pivot(index="bin_left", columns="label", values="count").reset_index()
        wide.columns = ["bin_left"] + [f"class_{c}" for c in wide.columns[1:]]
        write_dat(wide, out / f"hist_{feature}.dat")
    return 0


# =============================================================================
# Parser
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qhe-lab",
        description="Cumulantes de contagem de fotons e classificacao KNN da coerencia induzida por banho",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Semente global")
    parser.add_argument("--config", help="Arquivo JSON com RunConfig")
    parser.add_argument("--out", default=str(RESULTS_DIR), help="Diretorio de saida")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="Gera o dataset rotulado")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--data", help="Caminho do CSV (padrao <out>/dataset.csv)")
    p.add_argument("--p-h-values", type=float, nargs="+", dest="p_h_values")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="Treina um mapeamento com hiperparametros fixos")
    p.add_argument("--mapping", choices=list(MAPPINGS), required=True)
    p.add_argument("--data")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--weighting", choices=["uniform", "distance"], default="uniform")
    p.add_argument("--metric", choices=["euclidean", "manhattan"], default="euclidean")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tune", help="Busca aleatoria + treino + validacao")
    p.add_argument("--mapping", choices=list(MAPPINGS) + ["all"], default="all")
    p.add_argument("--data")
    p.add_argument("--n-iter", type=int, dest="n_iter")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("evaluate", help="Avalia um modelo salvo no split de validacao")
    p.add_argument("--model", required=True)
    p.add_argument("--data")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("apply", help="Estudo de cenarios com restricoes")
    p.add_argument("--scenario", help="JSON com ScenarioSpec")
    p.add_argument("--model")
    p.add_argument("--mapping", choices=list(MAPPINGS), default="f1")
    p.add_argument("--all", action="store_true", help="Os 9 + 3 + 3 casos com os modelos em --out")
    p.add_argument("--n", type=int, default=SCENARIO_SIZE)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("sweep", help="Acuracia em funcao do tamanho do dataset")
    p.add_argument("--sizes", type=int, nargs="+", default=list(SWEEP_SIZES))
    p.add_argument("--mapping", choices=list(MAPPINGS), default="f1")
    p.add_argument("--estimator", choices=["knn", "tree"], default="knn")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle-check", help="Cumulantes vs oraculos numericos e trajetorias")
    p.add_argument("--draws", type=int, default=5)
    p.add_argument("--t-final", type=float, default=1e5, dest="t_final")
    p.add_argument("--n-traj", type=int, default=200, dest="n_traj")
    p.add_argument("--skip-trajectories", action="store_true", dest="skip_trajectories")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("hist", help="Histogramas das razoes C por classe")
    p.add_argument("--data")
    p.add_argument("--bins", type=int, default=40)
    p.set_defaults(func=cmd_hist)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)

    try:
        config = RunConfig.load(args.config)
        Path(args.out).mkdir(parents=True, exist_ok=True)
        return args.func(args, config)
    except (DomainError, ValidationError, FileNotFoundError) as e:
        logger.error(f"Erro de validacao: {e}")
        return 2
    except NumericalQualityError as e:
        logger.error(f"Erro de qualidade numerica: {e}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
