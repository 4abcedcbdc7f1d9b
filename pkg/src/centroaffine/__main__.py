import os
import sys

threads = os.environ.get("CENTROAFFINE_THREADS")
if threads:
    # must happen before numpy is imported
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, threads)

from .cli import main  # noqa: E402

sys.exit(main())
