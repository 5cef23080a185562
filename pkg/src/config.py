import os
from pathlib import Path
from dotenv import load_dotenv

# Carrega variaveis do arquivo .env
load_dotenv()


# =============================================================================
# PATHS (Caminhos de arquivos)
# =============================================================================

# Diretorio raiz do projeto
PROJECT_ROOT = Path(__file__).parent.parent

# Diretorios de dados e resultados
DATA_DIR = Path(os.getenv("QHE_DATA_DIR", PROJECT_ROOT / "data"))
RESULTS_DIR = Path(os.getenv("QHE_RESULTS_DIR", PROJECT_ROOT / "results"))

# Nome padrao do dataset gerado
DATASET_FILENAME = "dataset.csv"


# =============================================================================
# ENGINE (Parametros fixos do motor, unidades atomicas, hbar = k_B = 1)
# =============================================================================

ENGINE_DEFAULTS = {
    "e1": 0.5,    # Energia dos estados degenerados |1>, |2>
    "e_a": 3.0,   # Energia de |a>
    "e_b": 2.0,   # Energia de |b>
    "g": 1.0,     # Acoplamento sistema-cavidade
    "r": 0.1,     # Taxa simetrica sistema-banho
    "tau": 0.1,   # Defasagem pura (adimensional)
}

# Temperaturas usadas nos exemplos de referencia
REFERENCE_TEMPERATURES = {"t_c": 1.0, "t_h": 3.5, "t_l": 2.0}


# =============================================================================
# RANGES (Faixas de amostragem dos parametros variados)
# =============================================================================

PARAMETER_RANGES = {
    "t_c": (0.4, 2.5),
    "t_h": (3.0, 4.5),
    "t_l": (1.0, 7.0),
    "p_c": (0.0, 1.0),
    "p_h": (0.0, 1.0),
}

# Limites das classes de p_h: [0, .25), [.25, .5), [.5, .75), [.75, 1]
CLASS_EDGES = (0.25, 0.50, 0.75)
N_CLASSES = 4


# =============================================================================
# NUMERICS (Tolerancias numericas)
# =============================================================================

# Valor singular abaixo do qual consideramos o espaco nulo (relativo)
NULL_SPACE_TOL = 1e-10

# Separacao minima entre o ramo da CGF e o segundo autovalor
SPECTRAL_GAP_MIN = 1e-8

# Numero de condicao maximo do sistema com borda
CONDITION_MAX = 1e12

# Cumulante classico abaixo disso torna a razao C indefinida
DEGENERATE_TOL = 1e-12

# Passos do oraculo de diferencas finitas (Richardson, razao 2)
FD_STEPS = (4e-3, 2e-3, 1e-3)

# Digitos decimais usados pelo oraculo de diferencas finitas
FD_PRECISION_DIGITS = 40

# Oraculo de contorno (integral de Cauchy)
CONTOUR_RADIUS = 0.1
CONTOUR_POINTS = 64


# =============================================================================
# DATASET (Geracao de dados)
# =============================================================================

DEFAULT_SEED = int(os.getenv("QHE_SEED", "2024"))

# Fracao de treino (70:30)
TRAIN_FRACTION = 0.70

# Fracao maxima de amostras degeneradas aceitavel
MAX_DEGENERATE_FRACTION = 0.10

# Tentativas maximas de re-sorteio por indice
MAX_REDRAWS_PER_INDEX = 100

# Tamanhos usados na varredura de tamanho de dataset
SWEEP_SIZES = (5_000, 10_000, 20_000, 35_000, 50_000)


# =============================================================================
# ML (Classificador KNN e validacao cruzada)
# =============================================================================

MAPPINGS = {
    "f1": (1, 2, 3, 4),
    "f2": (1, 2, 3),
    "f3": (1, 2),
}

KNN_DEFAULTS = {"k": 5, "weighting": "uniform", "metric": "euclidean"}
K_RANGE = (1, 50)
WEIGHTINGS = ("uniform", "distance")
METRICS = ("euclidean", "manhattan")

N_FOLDS = 5
N_ITER = 10

# Tamanho do lote de consultas no calculo de distancias
KNN_BATCH_SIZE = int(os.getenv("QHE_KNN_BATCH_SIZE", "256"))

# Arvore de decisao (baseline)
TREE_MAX_DEPTH = 10
TREE_MIN_SAMPLES_SPLIT = 2


# =============================================================================
# SCENARIOS (Estudo de aplicacao com restricoes)
# =============================================================================

SCENARIO_RANGES = (
    (0.76, 1.001),
    (0.80, 1.01),
    (0.76, 1.002),
    (0.76, 1.001),
)
SCENARIO_SIZE = 1000
MAX_REJECTION_ATTEMPTS = 1_000_000
MIN_ACCEPTANCE_RATE = 0.01


# =============================================================================
# RUNTIME (Execucao)
# =============================================================================

WORKERS = int(os.getenv("QHE_WORKERS", "1"))
SHOW_PROGRESS = os.getenv("QHE_PROGRESS", "1") != "0"
LOG_LEVEL = os.getenv("QHE_LOG_LEVEL", "INFO")
