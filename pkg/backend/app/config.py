import os
from dotenv import load_dotenv

load_dotenv(dotenv_path='backend/.env')

LOG_LEVEL = os.getenv("DECOHERENCE_LOG_LEVEL", "INFO").upper()

# Absolute tolerance on the smallest symplectic eigenvalue (vacuum = 1).
PHYSICAL_TOL = float(os.getenv("DECOHERENCE_PHYSICAL_TOL", "1e-9"))
SYMPLECTIC_TOL = float(os.getenv("DECOHERENCE_SYMPLECTIC_TOL", "1e-10"))
SEPARABILITY_TOL = float(os.getenv("DECOHERENCE_SEPARABILITY_TOL", "1e-9"))

SWEEP_WORKERS = int(os.getenv("DECOHERENCE_SWEEP_WORKERS", "4"))
RK4_STEPS = int(os.getenv("DECOHERENCE_RK4_STEPS", "1000"))
