import os
from dotenv import load_dotenv

load_dotenv()

# Output
OUTPUT_DIR = os.getenv("KMPC_OUTPUT_DIR", "out")
BANK_FILE = os.getenv("KMPC_BANK_FILE", "koopman_bank.txt")

# Runtime
LOG_LEVEL = os.getenv("KMPC_LOG_LEVEL", "INFO")
WORKERS = int(os.getenv("KMPC_WORKERS", 1))

# App
APP_NAME = "koopman-mpc"
