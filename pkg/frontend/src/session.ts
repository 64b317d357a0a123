// Session state: the config draft being edited, job tracking, and a history
// of finished runs keyed by config fingerprint so any view can be reproduced
// from (server URL, fingerprint).

import { cloneConfig, defaultConfig, validateConfig, ValidationIssue } from './config.js';
import type { JobRecord, PhaseLabel, RunConfig } from './types.js';

export interface HistoryEntry {
  fingerprint: string;
  kind: 'simulate' | 'sweep';
  label?: PhaseLabel;
  config: RunConfig;
  jobId: string;
  finishedAt: number;
}

export class SessionModel {
  draft: RunConfig = defaultConfig();
  history: HistoryEntry[] = [];
  activeJobs: Map<string, JobRecord> = new Map();

  issues(): ValidationIssue[] {
    return validateConfig(this.draft);
  }

  canSubmit(): boolean {
    return this.issues().length === 0;
  }

  resetDraft(): void {
    this.draft = defaultConfig();
  }

  loadConfig(config: RunConfig): void {
    this.draft = cloneConfig(config);
  }

  trackJob(record: JobRecord): void {
    this.activeJobs.set(record.id, record);
  }

  updateJob(record: JobRecord): void {
    this.activeJobs.set(record.id, record);
    if (record.status === 'done' || record.status === 'failed') {
      this.activeJobs.delete(record.id);
    }
  }

  recordResult(entry: HistoryEntry): void {
    this.history.unshift(entry);
  }

  findByFingerprint(fingerprint: string): HistoryEntry | undefined {
    return this.history.find((e) => e.fingerprint === fingerprint);
  }
}
