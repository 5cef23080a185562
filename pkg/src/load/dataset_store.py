import logging
from pathlib import Path
from typing import Optional, Union

import pandas as pd

from src.config import DATA_DIR, DATASET_FILENAME
from src.transform.dataset import Dataset

logger = logging.getLogger(__name__)

# 17 algarismos significativos: float -> texto -> float sem perda
FLOAT_FORMAT = "%.17g"


def meta_path(path: Union[str, Path]) -> Path:
    """dados/dataset.csv -> dados/dataset.meta.json"""
    path = Path(path)
    return path.with_name(f"{path.stem}.meta.json")


class DatasetWriter:
    """
    Grava datasets em CSV com o sidecar de proveniencia.

    Uso:
        writer = DatasetWriter()
        writer.write(dataset)                 # DATA_DIR/dataset.csv
        writer.write(dataset, "sweep_5k.csv")
    """

    def __init__(self, data_dir: Optional[Union[str, Path]] = None):
        self.data_dir = Path(data_dir) if data_dir else DATA_DIR

    def write(self, dataset: Dataset, filename: Union[str, Path] = DATASET_FILENAME) -> Path:
        """
        Grava o CSV (uma linha por amostra, na ordem do indice) e o meta.

        Args:
            dataset: Dataset a gravar
            filename: Nome ou caminho; relativo ao data_dir quando nao absoluto

        Returns:
            Caminho do CSV gravado
        """
        path = Path(filename)
        if not path.is_absolute():
            path = self.data_dir / path
        path.parent.mkdir(parents=True, exist_ok=True)

        frame = dataset.to_frame()
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        meta_path(path).write_text(dataset.meta.model_dump_json(indent=2) + "\n")

        logger.info(f"Dataset gravado: {len(frame)} linhas em {path}")
        return path


def write_csv(dataset: Dataset, path: Union[str, Path]) -> Path:
    return DatasetWriter().write(dataset, Path(path).resolve())


def write_table(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Tabela de resultados em CSV com a mesma precisao do dataset."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Tabela gravada: {path}")
    return path


def write_dat(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """
    Arquivo de dados para gnuplot: cabecalho comentado e colunas por espaco.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# " + " ".join(str(c) for c in frame.columns)]
    for row in frame.itertuples(index=False):
        lines.append(" ".join(_dat_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    logger.info(f"Dados para grafico gravados: {path}")
    return path


def _dat_value(value) -> str:
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    text = str(value)
    return f'"{text}"' if " " in text else text
