import logging
from typing import Iterable

import pandas as pd

from src.evaluation.metrics import ChiLike, as_counts, f_score, mcc, precision_recall

logger = logging.getLogger(__name__)


def class_report(chi: ChiLike) -> pd.DataFrame:
    """
    Tabela por classe: p_k, R_k (fracoes), F_k e phi_k (porcentagens).

    Metricas indefinidas ficam NaN com a flag *_defined = False.

    Returns:
        DataFrame com uma linha por classe
    """
    counts = as_counts(chi)
    rows = []
    for k in range(counts.shape[0]):
        p, r = precision_recall(counts, k)
        f = f_score(counts, k)
        phi = mcc(counts, k)
        rows.append({
            "class": k,
            "support_predicted": int(counts[k, :].sum()),
            "support_true": int(counts[:, k].sum()),
            "p_k": p.value,
            "R_k": r.value,
            "F_k": f.value,
            "phi_k": phi.value,
            "p_defined": p.defined,
            "R_defined": r.defined,
            "F_defined": f.defined,
            "phi_defined": phi.defined,
        })
    return pd.DataFrame(rows)


def render_confusion(chi: ChiLike) -> str:
    """
    Matriz em texto, linhas = previsto, colunas = verdadeiro.

    Exemplo (2 classes):
                 true 0  true 1
        pred 0        8       2
        pred 1        2       8
    """
    counts = as_counts(chi)
    n = counts.shape[0]
    width = max(6, len(str(counts.max())) + 2)

    header = " " * 8 + "".join(f"true {j}".rjust(width + 2) for j in range(n))
    lines = [header]
    for i in range(n):
        cells = "".join(str(counts[i, j]).rjust(width + 2) for j in range(n))
        lines.append(f"pred {i}".ljust(8) + cells)
    return "\n".join(lines)


def mapping_table(results: Iterable, include_timings: bool = True) -> pd.DataFrame:
    """
    Uma linha por mapeamento: hiperparametros escolhidos, tempos e acuracias.

    Args:
        results: Objetos com mapping, hyperparams, train_seconds,
                 predict_seconds, train_accuracy e validation_accuracy
        include_timings: Sem as colunas de tempo a tabela e deterministica
    """
    rows = []
    for result in results:
        hp = result.hyperparams
        row = {
            "mapping": result.mapping,
            "k": hp.k,
            "weighting": hp.weighting,
            "metric": hp.metric,
        }
        if include_timings:
            row["train_seconds"] = result.train_seconds
            row["predict_seconds"] = result.predict_seconds
        row["train_accuracy"] = result.train_accuracy
        row["validation_accuracy"] = result.validation_accuracy
        rows.append(row)
    logger.info(f"Tabela de mapeamentos com {len(rows)} linhas")
    return pd.DataFrame(rows)
