from pdae.commands import analyze, solve, sweep, verify

COMMANDS = [solve, sweep, analyze, verify]
