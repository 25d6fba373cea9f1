import json
import logging
import uuid
from pathlib import Path

from flask import Blueprint, current_app, jsonify, request, send_from_directory
from werkzeug.security import safe_join

from fedsim.exceptions import ExperimentError
from fedsim.services.experiment_service import ExperimentService

logger = logging.getLogger(__name__)

experiments_bp = Blueprint('experiments', __name__, url_prefix='/api/v1/experiments')


def _run_dir(run_id):
    path = safe_join(current_app.config['OUTPUT_ROOT'], run_id)
    if path is None or not Path(path).is_dir():
        return None
    return Path(path)


@experiments_bp.route('', methods=['POST'])
def run_experiment():
    """Run an experiment spec into a fresh run directory."""
    spec = request.get_json(silent=True)
    if not isinstance(spec, dict):
        return jsonify({
            'success': False,
            'message': 'Request body must be a JSON object'
        }), 400

    if spec.get('data_dir'):
        data_dir = safe_join(current_app.config['DATA_DIR'], str(spec['data_dir']))
        if data_dir is None:
            raise ExperimentError('data_dir must stay inside the configured data directory')
        spec = {**spec, 'data_dir': data_dir}

    run_id = uuid.uuid4().hex
    out_dir = Path(current_app.config['OUTPUT_ROOT']) / run_id
    written = ExperimentService.run_experiment(spec, out_dir)
    logger.info('Run %s finished with %d files', run_id, len(written))
    return jsonify({
        'success': True,
        'message': 'Experiment completed',
        'run_id': run_id,
        'files': [path.name for path in written]
    }), 201


@experiments_bp.route('/<run_id>', methods=['GET'])
def get_run(run_id):
    """List a run's report files with their metadata sidecars."""
    run_dir = _run_dir(run_id)
    if run_dir is None:
        return jsonify({
            'success': False,
            'message': 'Run not found'
        }), 404

    files = []
    for path in sorted(run_dir.glob('*.csv')):
        sidecar = Path(f'{path}.meta.json')
        files.append({
            'name': path.name,
            'size': path.stat().st_size,
            'meta': json.loads(sidecar.read_text(encoding='utf-8')) if sidecar.exists() else None
        })
    return jsonify({
        'success': True,
        'run_id': run_id,
        'files': files
    }), 200


@experiments_bp.route('/<run_id>/<path:filename>', methods=['GET'])
def download_file(run_id, filename):
    """Download one file of a run."""
    run_dir = _run_dir(run_id)
    if run_dir is None:
        return jsonify({
            'success': False,
            'message': 'Run not found'
        }), 404
    return send_from_directory(run_dir.resolve(), filename)
