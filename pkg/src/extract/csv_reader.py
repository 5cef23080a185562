import logging
import math
from pathlib import Path
from typing import Optional, Union

import pandas as pd
from pydantic import ValidationError

from src.config import DATA_DIR, DATASET_FILENAME
from src.engine.model import VARIED_FIELDS, EngineParams
from src.exceptions import ParseError
from src.load.dataset_store import meta_path
from src.transform.dataset import CSV_COLUMNS, FEATURE_COLUMNS, Dataset, DatasetMeta, LabeledSample
from src.transform.labels import label_of

logger = logging.getLogger(__name__)


class DatasetReader:
    """
    Le datasets gravados por DatasetWriter.

    Os valores sao lidos como texto e convertidos um a um, para que um
    campo mal formado aponte a linha exata do arquivo.

    Uso:
        reader = DatasetReader()
        ds = reader.read()                  # DATA_DIR/dataset.csv
        ds = reader.read("sweep_5k.csv")
    """

    def __init__(self, data_dir: Optional[Union[str, Path]] = None):
        self.data_dir = Path(data_dir) if data_dir else DATA_DIR

    def _get_filepath(self, filename: Union[str, Path]) -> Path:
        path = Path(filename)
        if not path.is_absolute():
            path = self.data_dir / path
        if not path.exists():
            raise FileNotFoundError(f"Arquivo nao encontrado: {path}")
        return path

    def read(self, filename: Union[str, Path] = DATASET_FILENAME) -> Dataset:
        """
        Reconstroi o Dataset (amostras, particao e meta).

        Raises:
            FileNotFoundError: se o CSV nao existir
            ParseError: cabecalho errado ou campo invalido, com numero da linha
        """
        path = self._get_filepath(filename)
        logger.info(f"Lendo dataset de: {path}")

        meta = self._read_meta(path)

        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        except (pd.errors.ParserError, UnicodeDecodeError) as e:
            raise ParseError(f"CSV ilegivel: {e}") from e
        except pd.errors.EmptyDataError as e:
            raise ParseError("Arquivo vazio, sem cabecalho", line=1) from e

        if list(frame.columns) != CSV_COLUMNS:
            raise ParseError(
                f"Cabecalho inesperado {list(frame.columns)}; esperado {CSV_COLUMNS}", line=1
            )

        samples, train, validation = [], [], []
        for row_index, row in enumerate(frame.itertuples(index=False)):
            line = row_index + 2
            record = row._asdict()
            sample = self._parse_sample(record, meta, line)
            samples.append(sample)

            split = record["split"]
            if split == "train":
                train.append(row_index)
            elif split == "validation":
                validation.append(row_index)
            else:
                raise ParseError(
                    f"Particao '{split}' nao reconhecida. Opcoes validas: ['train', 'validation']",
                    line=line,
                )

        if meta.n != len(samples):
            logger.warning(f"Meta declara n={meta.n}, arquivo tem {len(samples)} amostras")

        logger.info(f"Lidas {len(samples)} amostras de {path.name}")
        return Dataset(samples=samples, train=tuple(train), validation=tuple(validation), meta=meta)

    def _read_meta(self, path: Path) -> DatasetMeta:
        sidecar = meta_path(path)
        if not sidecar.exists():
            logger.warning(f"Sidecar {sidecar.name} ausente; usando parametros fixos padrao")
            return DatasetMeta(seed=None, n=0)
        try:
            return DatasetMeta.model_validate_json(sidecar.read_text())
        except ValidationError as e:
            raise ParseError(f"Meta invalido em {sidecar.name}: {e}") from e

    @staticmethod
    def _parse_sample(record: dict, meta: DatasetMeta, line: int) -> LabeledSample:
        values = {}
        for column in FEATURE_COLUMNS + list(VARIED_FIELDS):
            try:
                values[column] = float(record[column])
            except ValueError:
                raise ParseError(f"Coluna '{column}' nao numerica: '{record[column]}'", line=line)

        try:
            label = int(record["label"])
        except ValueError:
            raise ParseError(f"Rotulo nao inteiro: '{record['label']}'", line=line)

        try:
            params = EngineParams(
                **meta.fixed_params,
                **{name: values[name] for name in VARIED_FIELDS},
            )
        except ValidationError as e:
            raise ParseError(f"Parametros invalidos: {e}", line=line) from e

        if label != label_of(params.p_h):
            raise ParseError(
                f"Rotulo {label} inconsistente com p_h={params.p_h} (esperado {label_of(params.p_h)})",
                line=line,
            )

        features = tuple(values[c] for c in FEATURE_COLUMNS)
        if not all(math.isfinite(f) for f in features):
            raise ParseError(f"Razoes nao finitas: {features}", line=line)
        return LabeledSample(features=features, label=label, params=params)


def read_csv(path: Union[str, Path]) -> Dataset:
    return DatasetReader().read(Path(path).resolve())
