// Entry point: mount the explorer against the service origin.

import { ApiClient } from './api.js';
import { Explorer } from './ui.js';

const params = new URLSearchParams(window.location.search);
const server = params.get('server') ?? '';
const root = document.getElementById('app');
if (root) {
  new Explorer(root, new ApiClient(server)).mount();
}
