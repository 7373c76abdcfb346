import os
from dotenv import load_dotenv

load_dotenv()

# Unset means commands run in-process.
BACKEND_URL = os.getenv("DECOHERENCE_BACKEND_URL")
DEFAULT_CHAIN_LENGTH = int(os.getenv("DECOHERENCE_CHAIN_LENGTH", "100"))
DEFAULT_SQUEEZING = float(os.getenv("DECOHERENCE_SQUEEZING", "1.0"))
REQUEST_TIMEOUT = float(os.getenv("DECOHERENCE_REQUEST_TIMEOUT", "300"))
