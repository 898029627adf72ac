from py_fdp_audit.cli.main import app

app(prog_name="fdp-audit")
