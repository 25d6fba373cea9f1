#!/usr/bin/env python3
"""
Main entry point for the federated ecosystem resilience simulator.

Runs the command-line tool; ``serve`` starts the HTTP API.
"""

import click

from fedsim import create_app
from fedsim.cli import cli


@cli.command()
@click.option('--host', default='0.0.0.0')
@click.option('--port', type=int, default=5001)
def serve(host, port):
    """Serve the experiments HTTP API (development server)."""
    app = create_app()
    app.run(debug=app.config['DEBUG'], host=host, port=port)


if __name__ == "__main__":
    cli()
