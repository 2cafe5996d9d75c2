from wbasn_sim import __version__ as app_version

app_name = "wbasn_sim"
app_title = "WBASN Sim"
app_publisher = "WBASN Sim contributors"
app_description = "Round-based simulator of an event-driven body area sensor network measuring soldier fatigue"
app_license = "MIT"

# Configuration
# -------------

# reference defaults, relative to the app package
default_config = "defaults/defaults.conf"

# caps parallel runs inside run_experiment
threads_env_var = "WBASN_SIM_THREADS"

# Logging
# -------

logger_name = "wbasn_sim"
